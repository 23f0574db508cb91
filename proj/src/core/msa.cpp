#include "core/msa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qpmsa {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

HalfSite add2(const HalfSite& a, const HalfSite& b) {
  HalfSite out{};
  for (int i = 0; i < kMaxDim; ++i) out[i] = a[i] + b[i];
  return out;
}
HalfSite sub2(const HalfSite& a, const HalfSite& b) {
  HalfSite out{};
  for (int i = 0; i < kMaxDim; ++i) out[i] = a[i] - b[i];
  return out;
}

double min_separation(const std::vector<HalfSite>& pts, int dim) {
  if (pts.size() <= 1) return kInf;
  long long best = std::numeric_limits<long long>::max();
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      best = std::min<long long>(best, l1_dist2(pts[i], pts[j], dim));
  return best / 2.0;
}

}  // namespace

ScaleSchedule ScaleSchedule::from_epsilon(double epsilon, long long base_length,
                                          long long length_cap) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("ScaleSchedule: epsilon must be positive");
  ScaleSchedule s;
  s.epsilon0 = epsilon;
  s.delta0 = std::pow(epsilon, 1.0 / 20.0);
  s.base_length = base_length;
  s.length_cap = length_cap;
  s.gamma0 = std::abs(std::log(epsilon)) / 2.0;
  return s;
}

double ScaleSchedule::delta_for(long long block_size, double prev_delta) const {
  const double paper = std::exp(-std::pow(static_cast<double>(block_size), 2.0 / 3.0));
  double d = std::min(paper, prev_delta / delta_ratio);
  d = std::max(d, std::min(delta_floor, prev_delta / 2.0));
  return d;
}

double ScaleSchedule::gamma_for(int stage) const {
  if (stage <= 0) return gamma0;
  return (0.5 + std::pow(2.0, -stage - 1)) * gamma0;
}

bool ScaleSchedule::paper_ratio_holds(double prev_delta, double next_delta) {
  return next_delta < prev_delta / 10.0 &&
         std::abs(std::log(next_delta)) >= 20.0 * std::abs(std::log(prev_delta));
}

std::vector<Site> initial_singular_set(const LatticeRegion& ambient, double theta_star,
                                       double e_star, const PotentialProfile& v,
                                       const FrequencyVector& omega, double delta0) {
  std::vector<Site> out;
  for (const auto& x : ambient.sites())
    if (std::abs(v.eval(wrap_unit(theta_star + omega.dot(x))) - e_star) < delta0)
      out.push_back(x);
  return out;
}

ResonanceDistance resonance_distance(const HalfSite& x, const HalfSite& y, double theta_star,
                                     const FrequencyVector& omega) {
  ResonanceDistance r;
  r.difference_branch = torus_norm(omega.dot_half(sub2(x, y)));
  r.sum_branch = torus_norm(2.0 * theta_star + omega.dot_half(add2(x, y)));
  r.argmin_is_difference = r.difference_branch <= r.sum_branch;
  r.value = std::min(r.difference_branch, r.sum_branch);
  return r;
}

ScaleState initial_state(const ScaleSchedule& schedule, const LatticeRegion& ambient,
                         const Model& model, double theta_star, double e_star) {
  ScaleState st;
  st.schedule = schedule;
  StageData s0;
  s0.stage = 0;
  s0.delta = schedule.delta0;
  s0.size = 0;
  for (const auto& x :
       initial_singular_set(ambient, theta_star, e_star, model.potential, model.frequency,
                            schedule.delta0))
    s0.singular.push_back(doubled(x));
  s0.separation = min_separation(s0.singular, ambient.dim());
  st.stages.push_back(std::move(s0));
  return st;
}

namespace {

// dist(sigma(H_B(theta*)), E*) for the block, dense eigensolve
double block_spectral_dist(const ResonantBlock& blk, const Model& model, double theta_star,
                           double e_star) {
  const OperatorSlice op =
      assemble(blk.sites, TorusPhase(theta_star), model.epsilon, model.potential, model.frequency);
  return dist_to_spectrum(op.matrix, e_star);
}

// Subcase test on the stage-n block of a center: distance from E* to the
// spectrum with one copy of the nearest eigenvalue removed. A single site has
// nothing left, which reads as +inf (Subcase A).
double second_distance(const Eigen::VectorXd& spectrumv, double e_star) {
  if (spectrumv.size() <= 1) return kInf;
  int best = 0;
  for (int i = 1; i < spectrumv.size(); ++i)
    if (std::abs(spectrumv(i) - e_star) < std::abs(spectrumv(best) - e_star)) best = i;
  double out = kInf;
  for (int i = 0; i < spectrumv.size(); ++i)
    if (i != best) out = std::min(out, std::abs(spectrumv(i) - e_star));
  return out;
}

const ResonantBlock* find_block(const std::vector<BlockFamily>& families, int stage,
                                const HalfSite& center2) {
  if (stage < 1 || stage > static_cast<int>(families.size())) return nullptr;
  for (const auto& b : families[stage - 1].blocks)
    if (b.center2 == center2) return &b;
  return nullptr;
}

}  // namespace

ScaleState advance_stage(const ScaleState& state, const LatticeRegion& ambient, const Model& model,
                         double theta_star, double e_star) {
  const int n = state.stage();
  const StageData& cur = state.top();
  const int dim = ambient.dim();

  ScaleState next = state;
  StageData out;
  out.stage = n + 1;

  if (cur.singular.empty() || cur.frozen) {
    out.frozen = true;
    out.delta = state.schedule.delta_for(cur.size > 0 ? cur.size * cur.size : state.schedule.base_length,
                                         cur.delta);
    out.size = cur.size;
    out.separation = kInf;
    out.notes.push_back(cur.frozen ? "carried frozen state" : "Q_n empty: induction terminated");
    next.stages.push_back(std::move(out));
    return next;
  }

  // branch on the separation of Q_n against 10 * (next Case-1 size)
  const long long case1_size = n == 0 ? state.schedule.base_length : cur.size * cur.size;
  const bool case1 = cur.separation >= 10.0 * static_cast<double>(case1_size);
  out.branch = case1 ? Branch::Case1 : Branch::Case2;

  long long block_size = case1 ? case1_size : case1_size * case1_size;
  if (block_size > state.schedule.length_cap) {
    block_size = state.schedule.length_cap;
    out.notes.push_back("block size capped at " + std::to_string(block_size));
  }
  // a capped block must still hold the prior singular structure inside its
  // half-size kernel: prior blocks sit at the same center (Case 1) or at
  // s_n/2 from the midpoint (Case 2)
  {
    long long prior_reach = 0;
    if (n >= 1 && !state.families.empty())
      for (const auto& off : state.families.back().template_offsets2)
        prior_reach = std::max<long long>(prior_reach, (l1_norm(off, dim) + 1) / 2);
    const long long min_viable =
        case1 ? 2 * prior_reach + 1
              : static_cast<long long>(std::ceil(cur.separation)) + 2 * prior_reach + 1;
    if (block_size < min_viable) {
      block_size = min_viable;
      out.notes.push_back("block size raised to " + std::to_string(block_size) +
                          " to keep the prior structure inside the kernel");
    }
  }
  out.size = block_size;
  out.delta = state.schedule.delta_for(block_size, cur.delta);

  // P_{n+1}
  std::vector<HalfSite> centers;
  std::map<HalfSite, HalfSite> mirror_of;  // Case 2: singular center -> its midpoint
  if (case1) {
    centers = cur.singular;
  } else {
    // minimal-separation pair, lexicographic tie-break
    HalfSite ci{}, cj{};
    long long best = std::numeric_limits<long long>::max();
    for (size_t i = 0; i < cur.singular.size(); ++i)
      for (size_t j = i + 1; j < cur.singular.size(); ++j) {
        long long d = l1_dist2(cur.singular[i], cur.singular[j], dim);
        if (d < best) {
          best = d;
          ci = std::min(cur.singular[i], cur.singular[j]);
          cj = std::max(cur.singular[i], cur.singular[j]);
        }
      }
    std::set<HalfSite> mids;
    for (const auto& c : cur.singular) {
      MirrorImage mi = mirror_image(dim, c, ci, cj, theta_star, model.frequency, cur.delta);
      HalfSite mid{};
      for (int k = 0; k < kMaxDim; ++k) {
        const int sum = c[k] + mi.mirror2[k];
        if (sum % 2 != 0)
          throw std::runtime_error("advance_stage: midpoint not representable in doubled coords");
        mid[k] = sum / 2;
      }
      mids.insert(mid);
      mirror_of[c] = mid;
      if (mi.ambiguous)
        out.notes.push_back("mirror sign ambiguous at " + half_to_string(c, dim) +
                            " (bound not discriminating at this scale)");
    }
    centers.assign(mids.begin(), mids.end());
  }

  // Drop centers whose block cannot fit inside the ambient region; the block
  // template is shared, so rebuild until stable.
  BlockFamily family;
  BlockBuildDiagnostics diag;
  const long long pad = state.families.empty() ? 0 : state.families.back().block_size;
  while (true) {
    if (centers.empty()) {
      out.frozen = true;
      out.separation = kInf;
      out.notes.push_back("no stage-" + std::to_string(n + 1) +
                          " block fits the ambient region; state frozen");
      next.stages.push_back(std::move(out));
      return next;
    }
    family = build_block_family(dim, n + 1, centers, next.families, block_size, pad,
                                model.frequency, theta_star, &diag);
    std::vector<HalfSite> kept;
    for (const auto& b : family.blocks)
      if (ambient.contains_all(b.sites)) kept.push_back(b.center2);
    if (kept.size() == centers.size()) break;
    for (const auto& c : centers)
      if (std::find(kept.begin(), kept.end(), c) == kept.end())
        out.notes.push_back("center " + half_to_string(c, dim) +
                            " dropped: block exceeds the ambient region");
    centers = std::move(kept);
  }
  out.centers = centers;

  // Q_{n+1} by dense eigensolve per block
  std::vector<Eigen::VectorXd> block_spectra(family.blocks.size());
  for (size_t i = 0; i < family.blocks.size(); ++i) {
    const OperatorSlice op = assemble(family.blocks[i].sites, TorusPhase(theta_star),
                                      model.epsilon, model.potential, model.frequency);
    block_spectra[i] = spectrum(op.matrix);
  }
  for (size_t i = 0; i < family.blocks.size(); ++i) {
    const double dist = (block_spectra[i].array() - e_star).abs().minCoeff();
    if (dist < out.delta) out.singular.push_back(family.blocks[i].center2);
  }
  out.separation = min_separation(out.singular, dim);

  // Class A/B per singular center, from the subcase test on its stage-n block
  bool any_b = false, any_a = false;
  for (const auto& c : out.singular) {
    if (!case1) {
      any_b = true;
      continue;
    }
    double second;
    if (n == 0) {
      second = kInf;  // single-site block
    } else {
      const ResonantBlock* prior = find_block(next.families, n, c);
      if (!prior)
        throw std::runtime_error("advance_stage: missing stage-" + std::to_string(n) +
                                 " block under singular center " + half_to_string(c, dim));
      const OperatorSlice op = assemble(prior->sites, TorusPhase(theta_star), model.epsilon,
                                        model.potential, model.frequency);
      second = second_distance(spectrum(op.matrix), e_star);
    }
    if (second > cur.delta)
      any_a = true;
    else
      any_b = true;
  }
  if (!out.singular.empty()) {
    out.class_tag = any_b ? ClassTag::B : ClassTag::A;
    if (any_a && any_b)
      out.notes.push_back("mixed subcase outcomes; tagged Class B (the weaker hypothesis set)");
  }

  // mu consistency over Class-B centers
  if (out.class_tag == ClassTag::B && !out.singular.empty()) {
    const double bound = 3.0 * std::sqrt(cur.delta);
    double best_worst = kInf;
    std::optional<double> chosen;
    for (double mu : {0.0, 0.5}) {
      double worst = 0.0;
      for (const auto& c : out.singular)
        worst = std::max(worst,
                         torus_norm(theta_star + model.frequency.dot_half(c) - mu));
      if (worst <= bound && worst < best_worst) {
        best_worst = worst;
        chosen = mu;
      }
    }
    if (!chosen) {
      std::ostringstream os;
      os << "advance_stage: no common mu in {0, 1/2} puts all Class-B centers within "
         << bound << " of a symmetry phase";
      throw std::runtime_error(os.str());
    }
    out.mu = chosen;
  }

  // kernel containment: every stage-n singular block sits inside the half-size
  // interior of exactly one new block
  for (const auto& q : cur.singular) {
    const bool dropped = case1
                             ? std::find(centers.begin(), centers.end(), q) == centers.end()
                             : !mirror_of.count(q) ||
                                   std::find(centers.begin(), centers.end(), mirror_of[q]) ==
                                       centers.end();
    if (dropped) continue;  // boundary exclusions are already noted
    std::vector<Site> prior_sites;
    if (n == 0) {
      prior_sites.push_back(to_site(q));
    } else {
      const ResonantBlock* prior = find_block(next.families, n, q);
      if (prior) prior_sites = prior->sites.sites();
    }
    int containing = 0;
    for (const auto& b : family.blocks) {
      bool inside = true;
      for (const auto& s : prior_sites)
        if (l1_dist2_site(s, b.center2, dim) > block_size || !b.sites.contains(s)) {
          inside = false;
          break;
        }
      if (inside) ++containing;
    }
    if (containing != 1)
      throw std::runtime_error("advance_stage: stage-" + std::to_string(n) +
                               " singular block at " + half_to_string(q, dim) +
                               " is inside the half-size kernel of " +
                               std::to_string(containing) + " stage-" + std::to_string(n + 1) +
                               " blocks (expected exactly 1)");
  }

  next.families.push_back(std::move(family));
  next.stages.push_back(std::move(out));
  return next;
}

CenterTheoremReport verify_center_theorem(const ScaleState& state, const Model& model,
                                          double theta_star) {
  const StageData& cur = state.top();
  CenterTheoremReport rep;
  rep.stage = cur.stage;
  rep.bound = 2.0 * std::sqrt(cur.delta);
  const int dim = model.frequency.dim();
  for (size_t i = 0; i < cur.singular.size(); ++i) {
    for (size_t j = i + 1; j < cur.singular.size(); ++j) {
      ++rep.pairs;
      const ResonanceDistance m =
          resonance_distance(cur.singular[i], cur.singular[j], theta_star, model.frequency);
      if (m.value > rep.worst_m) {
        rep.worst_m = m.value;
        rep.worst_a = cur.singular[i];
        rep.worst_b = cur.singular[j];
      }
      if (m.value > rep.bound) rep.pass = false;
      if (cur.stage == 0) {
        const double ei =
            model.potential.eval(wrap_unit(theta_star + model.frequency.dot_half(cur.singular[i])));
        const double ej =
            model.potential.eval(wrap_unit(theta_star + model.frequency.dot_half(cur.singular[j])));
        const double sharp = 2.0 * std::sqrt(std::abs(ei - ej));
        rep.worst_sharp_ratio = std::max(rep.worst_sharp_ratio,
                                         sharp > 0 ? m.value / sharp : (m.value > 0 ? kInf : 0.0));
        if (m.value > sharp) rep.sharp_pass = false;
      }
    }
  }
  (void)dim;
  return rep;
}

GoodSetCertificate is_n_good(const LatticeRegion& lambda, const ScaleState& state) {
  GoodSetCertificate cert;
  cert.good = true;
  if (state.stages.empty()) return cert;
  const StageData& s0 = state.stages.front();
  const int dim = lambda.dim();
  for (const auto& q2 : s0.singular) {
    const Site q = to_site(q2);
    if (!lambda.contains(q)) continue;
    bool covered = false;
    for (int m = 1; m <= state.stage() && !covered; ++m) {
      if (m > static_cast<int>(state.families.size())) break;
      const auto& singular_m = state.stages[m].singular;
      for (const auto& b : state.families[m - 1].blocks) {
        const bool is_singular =
            std::find(singular_m.begin(), singular_m.end(), b.center2) != singular_m.end();
        if (is_singular) continue;
        if (b.sites.contains(q) && lambda.contains_all(b.sites)) {
          cert.cover.emplace_back(q, m, b.center2);
          covered = true;
          break;
        }
      }
    }
    if (!covered) {
      cert.good = false;
      if (!cert.first_uncovered) cert.first_uncovered = q;
    }
  }
  (void)dim;
  return cert;
}

GreenFunctionReport check_n_good_bounds(const OperatorSlice& op, const ScaleState& state,
                                        double e_star, double theta_star) {
  const int n = state.stage();
  const double delta_n = state.top().delta;
  const long long l_n = std::max<long long>(state.top().size, 1);
  const int cutoff = std::max(1, static_cast<int>(std::ceil(std::pow(static_cast<double>(l_n), 5.0 / 6.0))));
  const double gamma_n = state.schedule.gamma_for(n);
  GreenFunctionReport rep = check_green_bounds(op, e_star, 10.0 / delta_n, gamma_n, cutoff);
  rep.theta = theta_star;
  return rep;
}

}  // namespace qpmsa
