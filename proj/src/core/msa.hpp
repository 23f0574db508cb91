#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/block_geometry.hpp"
#include "core/green.hpp"
#include "core/operator.hpp"

namespace qpmsa {

struct Model {
  double epsilon;
  PotentialProfile potential;
  FrequencyVector frequency;
};

// Scale ladder. delta0 defaults to epsilon0^{1/20}; at desk scale it is
// usually overridden (the overriding delta0 implicitly redefines epsilon0 as
// delta0^20, which is recorded). Stage deltas follow
//   delta_n = max(min(e^{-l_n^{2/3}}, delta_{n-1}/ratio), floor)
// which coincides with the e^{-l^{2/3}} rule once lengths are large.
struct ScaleSchedule {
  double epsilon0 = 0.0;
  double delta0 = 0.0;
  long long base_length = 6;   // Case-1 size of the first blocks
  long long length_cap = 1 << 20;
  double delta_ratio = 20.0;
  double delta_floor = 1e-12;
  double gamma0 = 0.0;  // |log eps|/2 for the model epsilon

  static ScaleSchedule from_epsilon(double epsilon, long long base_length, long long length_cap);

  double delta_for(long long block_size, double prev_delta) const;
  // gamma_0 at stage 0, then (1/2 + 2^{-n-1}) gamma_0: decreasing, >= gamma0/2.
  double gamma_for(int stage) const;
  // whether the pure paper rule (delta ratios >= 20 in log) holds for a step
  static bool paper_ratio_holds(double prev_delta, double next_delta);
};

enum class Branch { None, Case1, Case2 };
enum class ClassTag { Undetermined, A, B };

struct StageData {
  int stage = 0;
  std::vector<HalfSite> centers;   // P_n; empty at stage 0 (P_0 = all ambient sites)
  std::vector<HalfSite> singular;  // Q_n
  double delta = 0.0;
  long long size = 0;              // block size l_n (0 at stage 0)
  double separation = 0.0;         // s_n = min l1 distance over Q_n, inf when #Q_n <= 1
  Branch branch = Branch::None;    // branch taken to build this stage
  ClassTag class_tag = ClassTag::Undetermined;
  std::optional<double> mu;
  bool frozen = false;
  std::vector<std::string> notes;
};

struct ScaleState {
  ScaleSchedule schedule;
  std::vector<StageData> stages;     // index = stage number
  std::vector<BlockFamily> families; // families[m-1] covers stage m

  int stage() const { return static_cast<int>(stages.size()) - 1; }
  const StageData& top() const { return stages.back(); }
  double delta(int n) const { return stages[n].delta; }
};

// Exact threshold scan: Q_0 = {x in ambient : |v(theta* + x.omega) - E*| < delta0}.
std::vector<Site> initial_singular_set(const LatticeRegion& ambient, double theta_star,
                                       double e_star, const PotentialProfile& v,
                                       const FrequencyVector& omega, double delta0);

struct ResonanceDistance {
  double value = 0.0;
  double difference_branch = 0.0;   // ||(x-y).omega||
  double sum_branch = 0.0;          // ||2 theta* + (x+y).omega||
  bool argmin_is_difference = true;
};

// m(x, y) = min(||(x-y).omega||, ||2 theta* + (x+y).omega||), symmetric in x, y.
ResonanceDistance resonance_distance(const HalfSite& x, const HalfSite& y, double theta_star,
                                     const FrequencyVector& omega);

ScaleState initial_state(const ScaleSchedule& schedule, const LatticeRegion& ambient,
                         const Model& model, double theta_star, double e_star);

// One induction step: branch on s_n vs 10 l_n^2, build P_{n+1} (identity or
// mirror midpoints), construct blocks through the absorption iteration, scan
// Q_{n+1} by dense eigensolve, classify Class A/B, and determine mu. Raises on
// block overlap, absorption overflow or inconsistent mu. Candidate centers
// whose block cannot fit inside the ambient region are dropped and noted.
ScaleState advance_stage(const ScaleState& state, const LatticeRegion& ambient, const Model& model,
                         double theta_star, double e_star);

struct CenterTheoremReport {
  int stage = 0;
  int pairs = 0;
  bool pass = true;
  double bound = 0.0;          // 2 sqrt(delta_n)
  double worst_m = 0.0;
  HalfSite worst_a{}, worst_b{};
  // stage 0 only: sharper bound m <= 2 |E_0^i - E_0^j|^{1/2}
  bool sharp_pass = true;
  double worst_sharp_ratio = 0.0;
};

CenterTheoremReport verify_center_theorem(const ScaleState& state, const Model& model,
                                          double theta_star);

struct GoodSetCertificate {
  bool good = false;
  // for every point of lambda ∩ Q_0: the covering regular block (stage, center)
  std::vector<std::tuple<Site, int, HalfSite>> cover;
  std::optional<Site> first_uncovered;
};

// lambda is n-good when every point of lambda ∩ Q_0 lies in an m-regular
// block contained in lambda for some m <= n.
GoodSetCertificate is_n_good(const LatticeRegion& lambda, const ScaleState& state);

// Bounds for certified n-good sets: ||G|| <= 10/delta_n and decay at rate
// gamma_n past the cutoff l_n^{5/6}.
GreenFunctionReport check_n_good_bounds(const OperatorSlice& op, const ScaleState& state,
                                        double e_star, double theta_star);

}  // namespace qpmsa
