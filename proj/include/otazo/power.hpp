// Power and artificial-noise scheduling over a T-iteration horizon with
// pre-sampled channel gains: closed-form adaptive schedules for the analog
// and sign-based uplinks (with the dual variable found by bisection), the
// even-split and trend-reversed baselines, the sign-reversal probability
// bound, gap-bound monitors, and a brute-force grid oracle for tiny
// instances.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "otazo/privacy.hpp"

namespace otazo {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverInputs {
  Eigen::MatrixXd gains;      // T x K channel gains, all > 0
  double power_cap = 1.0;     // per-client transmit power limit P
  double noise_power = 1.0;   // receiver noise N0
  double gamma = 1.0;         // projection bound (pass 1 for the sign uplink)
  double contraction = 0.998; // per-iteration gap decay factor in (0,1)
  double e0 = 0.0;            // sign-reversal bound, sign uplink only
  Eigen::Index dim = 1;       // model dimension (enters power constraints)
};

struct PowerSchedule {
  Eigen::VectorXd c;      // T effective post-inversion gains, all > 0
  Eigen::MatrixXd sigma;  // T x K artificial noise std devs (solvers emit 0)
  double zeta_star = 0.0; // dual variable; 0 in the full-power branch
  bool full_power_branch = false;
};

// Adaptive schedule for the analog uplink. Full-power branch when the
// all-caps schedule's own privacy cost (2P/N0)*sum_t min_k h_tk^2 is < r_dp;
// otherwise c_t = min{A^(-t/4) sqrt(N0) / ((2 zeta)^(1/4) sqrt(gamma)), cap_t}
// with zeta bisected until the total cost equals r_dp (1e-9 relative).
PowerSchedule solve_p1(const SolverInputs& in, double r_dp);

// Adaptive schedule for the sign uplink; same branch rule with gamma = 1.
// The bisection family requires zeta < min_t A^(-t) B2^2 / 2; if the total
// cost at the bracket ceiling still exceeds r_dp the instance is outside the
// closed form's reach and a SolverError is thrown.
PowerSchedule solve_p2(const SolverInputs& in, double r_dp);

// Even budget split: c_t = min{sqrt(N0 r_dp / (2 T gamma^2)), cap_t}.
PowerSchedule static_schedule(const SolverInputs& in, double r_dp);

// solve_p1/solve_p2 with the adaptive exponent sign flipped and the dual
// variable re-bisected.
PowerSchedule reversed_schedule(const SolverInputs& in, double r_dp,
                                bool digital);

// Upper bound on the squared server-side sign-reversal probability given a
// per-client reversal bound e0 in [0, 1/2], K clients, and effective noise
// ratio m/c.
double et_upper_bound(double e0, int K, double m, double c);

// Objectives the schedules optimize; used by the oracle comparisons.
double p1_objective(const SolverInputs& in, const PowerSchedule& s);
double p2_objective(const SolverInputs& in, const PowerSchedule& s);

// Per-iteration privacy costs of a schedule (gamma taken from `in`; pass the
// digital flag to force gamma = 1).
std::vector<PrivacyCostRecord> schedule_cost_records(const SolverInputs& in,
                                                     const PowerSchedule& s,
                                                     bool digital);

// Throws SolverError unless every (t,k) power constraint holds within 1e-9
// relative and the total privacy cost fits r_dp. Solvers call this on their
// own output before returning.
void check_feasible(const SolverInputs& in, const PowerSchedule& s,
                    double r_dp, bool digital);

struct BruteForceResult {
  PowerSchedule schedule;
  double objective = 0.0;
  bool feasible = false;
  double grid_ratio = 1.0;  // consecutive grid point ratio, for slack bounds
};

// Exhaustive log-grid search over c (T <= 3, K <= 3 only). n_sigma > 0 adds a
// shared-across-clients artificial-noise grid so callers can check that
// injecting noise never improves the objective.
BruteForceResult brute_force_p1(const SolverInputs& in, double r_dp,
                                int grid_size, int n_sigma = 0);
BruteForceResult brute_force_p2(const SolverInputs& in, double r_dp,
                                int grid_size, int n_sigma = 0);

// Gap-bound monitors.
double bound_rhs_analog(double g0, double A, double eta, double lumped,
                        const Eigen::VectorXd& c, const Eigen::VectorXd& m,
                        int K);
double bound_rhs_digital(double g0, double A, const Eigen::VectorXd& e2_bounds,
                         double theta, double r);

}  // namespace otazo
