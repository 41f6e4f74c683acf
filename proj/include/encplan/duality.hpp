#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "encplan/investment.hpp"
#include "encplan/lp.hpp"
#include "encplan/uc.hpp"

namespace encplan {

/// Fixed commitment of one day, [i][t]. Flexible units are on.
struct Commitment {
  std::vector<std::vector<double>> u, v;
  static Commitment from_dispatch(const DayDispatch& d);
  static Commitment all_on(const PowerSystem& system, int hours);
};

/// Economic dispatch of one day with the commitment fixed: an LP. Column and
/// row indices are kept so duals can be mapped back to their families.
struct TcedModel {
  MilpModel lp;
  int hours = 0, buses = 0, lines = 0;
  std::vector<int> segments;  // per generator
  IndexTable g;  // [s][i][t]
  IndexTable spill, shed, soc, chg, dis, theta, balance, socdef;  // [0][b][t]
  IndexTable flow, flowdef;                                       // [0][l][t]
  int emissions = -1, emissions_row = -1, enc_row = -1;
};

/// Dispatch cost excludes no-load and start-up costs (they are fixed by the
/// commitment) but includes carbon cost on all emissions and the shedding
/// penalties. `baseline` adds the ENC row E <= chi * baseline.
TcedModel build_tced(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                     const StorageAllocation& alloc, const StorageSpec& storage, const Commitment& commitment,
                     std::optional<double> baseline = {});

/// Machine dual of an LP `min c'x, L <= Ax <= U, l <= x <= u`:
/// `max sum L y+ - U y- + l w+ - u w-  s.t.  A'(y+ - y-) + w+ - w- = c`, with a
/// single free multiplier for equality rows and fixed columns. Stored as a
/// minimization of the negated objective.
struct LpDual {
  MilpModel model;
  double constant = 0.0;  // primal objective offset
  std::vector<int> row_free, row_lo, row_up;  // per primal row, -1 if absent
  std::vector<int> col_free, col_lo, col_up;  // per primal column
  std::vector<int> constraint;                // dual row per primal column

  double objective(std::span<const double> y) const { return constant - model.objective_value(y); }
};

/// Names of dual variables: `namer(primal_name, side)` with side one of
/// "row", "lo", "up", "fix" (fixed column). The default prefixes the primal name.
LpDual dualize(const MilpModel& lp, const std::function<std::string(const std::string&, const char*)>& namer = {});

struct DualTced {
  TcedModel primal;
  LpDual dual;
};

/// Dual variables are named after the families of the formulation
/// (lambda, beta, gamma, delta, phi, kappa, xi, rho, alpha, plus mu for the
/// emissions definition and sigma for load shedding).
DualTced build_dual_tced(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                         const StorageAllocation& alloc, const StorageSpec& storage, const Commitment& commitment,
                         std::optional<double> baseline = {});

/// Dual values in the sign convention of the printed dual (all bound and
/// inequality multipliers nonnegative; kappa and beta with the printed signs).
struct DualSolution {
  using Grid = std::vector<std::vector<double>>;
  double objective = 0.0;
  double alpha = 0.0;  // ENC
  double mu = 0.0;     // emissions definition, carbon price + alpha
  Grid lambda, kappa, xi_lo, xi_up, rho_chg_lo, rho_chg_up, rho_dis_lo, rho_dis_up;  // [b][t]
  Grid phi_lo, phi_up, sigma_lo, sigma_up;                                         // [b][t]
  Grid beta, gamma_lo, gamma_up;                                                   // [l][t]
  std::vector<Grid> delta_lo, delta_up;                                            // [i][s][t]
  std::vector<char> storage;  // per bus, 1 where storage columns exist
};

DualSolution read_dual(const DualTced& d, std::span<const double> y);

/// sum_b sum_t Qmax xi_up + Jmax (rho_dis_up + rho_chg_up).
double profit_via_duals(const DualSolution& dual, const StorageAllocation& alloc, const StorageSpec& storage);
/// sum_b sum_t lambda (dis - chg) with the primal storage schedule.
double profit_via_lambda(const DualSolution& dual, const TcedModel& primal, std::span<const double> x);

/// Largest residual of each printed dual row family evaluated at `dual`, with
/// the segment cost b taken as b + P*h and the spill row carrying P^ren.
struct PrintedResiduals {
  double gist = 0.0, jdis = 0.0, jchg = 0.0, theta = 0.0, flow = 0.0, soc = 0.0, spill = 0.0;
  double max() const;
};
PrintedResiduals printed_dual_residuals(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                                        const StorageSpec& storage, const DualSolution& dual);

struct TcedDualityCheck {
  LpStatus primal_status = LpStatus::Infeasible, dual_status = LpStatus::Infeasible;
  double primal = 0.0, dual = 0.0;
  double sd_residual = 0.0;  // |primal - dual| / (1 + |primal|)
  double profit_lambda = 0.0, profit_dual = 0.0;
  double profit_residual = 0.0;  // |difference| / (1 + |profit_lambda|)
  double printed_residual = 0.0;
  DualSolution values;
};

/// Solves the TCED and its dual and compares objectives and the two profit
/// expressions.
TcedDualityCheck check_tced_duality(const PowerSystem& system, const DailyProfile& day, const EconomicParams& econ,
                                    const StorageAllocation& alloc, const StorageSpec& storage,
                                    const Commitment& commitment, std::optional<double> baseline = {});

/// Bounds on the dual variables that multiply upper-level binaries.
struct BigM {
  double lambda = 0.0;     // |lambda|
  double delta = 0.0;      // delta_up
  double alpha = 0.0;      // alpha (0 when the ENC is off)
  double xi = 0.0;         // xi_up
  double rho = 0.0;        // rho_chg_up, rho_dis_up
  double alpha_hat = 0.0;  // cap on alpha used in the lambda bound
  int escalations = 0;
};

BigM compute_bigM(const PowerSystem& system, const EconomicParams& econ, bool enc_active, const StorageSpec& storage);

struct BigMFamilyAudit {
  std::string family;
  double M = 0.0;
  double max_abs = 0.0;
  bool ok = true;  // max_abs < 0.99 M
};

struct BigMAudit {
  std::vector<BigMFamilyAudit> families;
  int escalations = 0;
  bool ok = true;
};

/// Checks observed optimal duals against M; on failure multiplies every M by
/// 10 and re-checks, at most three times.
BigMAudit audit_bigM(BigM& M, const std::vector<DualSolution>& duals);

/// Smallest n with 2^n - 1 >= max_units.
int expansion_bits(int max_units);
/// Bits (least significant first) with sum 2^n x_n == units.
std::vector<int> binary_expansion(int units, int bits);

struct PcsleAux {
  int w = -1, binary = -1, continuous = -1;
};

struct PcsleModel {
  UcModel uc;  // primal part, with integer unit counts linked to the bits
  int bits_per_bus = 0;
  std::vector<std::vector<int>> bits;  // [b][n], empty rows at non-candidates
  std::vector<PcsleAux> aux;
  std::vector<int> strong_duality_rows;  // per day
  int profit_row = -1;
  BigM M;
};

/// Relaxed PhSI as one MILP: UC constraints, the dual of every day's TCED,
/// one strong-duality row per day and the profit floor written with duals.
/// Each binary x continuous product becomes an auxiliary with four big-M rows.
/// `bits` = 0 picks the smallest expansion; a budget too small for
/// `max_units_per_bus` is a DomainError.
PcsleModel build_pcsle(const PowerSystem& system, const std::vector<RepresentativeDay>& days,
                       const EconomicParams& econ, const UcSpec& spec, int max_units_per_bus, const BigM& M,
                       int bits = 0);

struct PcsleResult {
  MilpStatus status = MilpStatus::Unknown;
  double objective = 0.0;  // annual, incumbent (if any)
  double bound = 0.0;      // annual lower bound
  StorageAllocation alloc;
  double max_linearization_error = 0.0;  // |w - binary * continuous| at the incumbent
  long nodes = 0;
};

PcsleResult solve_pcsle(const PcsleModel& model, const PowerSystem& system, const EconomicParams& econ,
                        const MilpOptions& options);

/// {case, primal, dual, gap, M_audit}
void write_duality_audit_json(const std::filesystem::path& path, const std::string& case_id, double primal,
                              double dual, const BigM& M, const BigMAudit& audit, const std::string& config_hash,
                              std::uint64_t seed);

}  // namespace encplan
