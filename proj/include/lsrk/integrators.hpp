#pragma once

// Single steps and adaptive integration for the three method families.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lsrk/coefficients.hpp"
#include "lsrk/ode.hpp"
#include "lsrk/stepcontrol.hpp"

namespace lsrk {

struct StepResult {
  State u_new;
  State err_diff;  // u_new - uhat_new
  int nfe = 0;
  bool ok = true;  // false on nonfinite or inadmissible stage values
};

/// Owns the registers of one integration and the FSAL cache.
class Stepper {
 public:
  virtual ~Stepper() = default;

  /// Attempt a step from (t, u). Never modifies u. The FSAL cache is used for
  /// the first stage when it is filled; the new end-point derivative is held
  /// until accept().
  virtual StepResult step(const Semidiscretization& rhs, double t, double dt, const State& u) = 0;

  void accept();
  void reject();
  bool fsal_cached() const { return cache_valid_; }
  virtual bool fsal() const = 0;
  virtual std::string name() const = 0;

 protected:
  // Evaluates f and counts it; returns false if the RHS rejected the state.
  bool eval(const Semidiscretization& rhs, double t, const State& u, State& du, int& nfe);

  State cache_, pending_;
  bool cache_valid_ = false;
  bool pending_valid_ = false;
};

class ButcherStepper : public Stepper {
 public:
  explicit ButcherStepper(ButcherPair pair);
  StepResult step(const Semidiscretization& rhs, double t, double dt, const State& u) override;
  bool fsal() const override { return pair_.fsal; }
  std::string name() const override { return pair_.name; }

 private:
  ButcherPair pair_;
  std::vector<State> k_;
  State y_;
};

/// Algorithm-level 3S* / 3S*+ stepper: three registers (four for 3S*+)
/// plus the right-hand side buffer.
class LowStorageStepper : public Stepper {
 public:
  explicit LowStorageStepper(LowStorageScheme scheme);
  StepResult step(const Semidiscretization& rhs, double t, double dt, const State& u) override;
  bool fsal() const override { return scheme_.fsal(); }
  std::string name() const override { return scheme_.name; }
  std::size_t register_count() const;

 private:
  LowStorageScheme scheme_;
  State S2_, S4_, k_;
};

class Ssp43Stepper : public Stepper {
 public:
  Ssp43Stepper() = default;
  StepResult step(const Semidiscretization& rhs, double t, double dt, const State& u) override;
  bool fsal() const override { return false; }
  std::string name() const override { return "SSP3(2)4"; }

 private:
  State uhat_, k_;
};

std::unique_ptr<Stepper> make_stepper(const Method& m);

/// One-shot step helpers (no FSAL cache).
StepResult butcher_step(const ButcherPair& pair, const Semidiscretization& rhs, double t, double dt,
                        const State& u);
StepResult lowstorage_step(const LowStorageScheme& scheme, const Semidiscretization& rhs, double t,
                           double dt, const State& u);
StepResult ssp43_step(const Semidiscretization& rhs, double t, double dt, const State& u);

// ---------------------------------------------------------------------------
// Adaptive integration

using Controller = std::variant<ControllerConfig, CflConfig>;

struct StepRecord {
  double t;   // start of the attempted step
  double dt;
  double w;   // weighted error (0 under CFL control)
  bool accepted;
};

struct RunReport {
  std::string scheme;
  std::string controller;
  double setting = 0.0;  // tolerance or CFL number
  long nfe = 0;          // stepping evaluations
  long nfe_startup = 0;  // evaluations spent choosing the first step
  long accepted = 0;
  long rejected = 0;
  double t_final = 0.0;
  State u_final;
  std::vector<double> error;  // per variable, when an exact solution exists
  double wall_time = 0.0;
  std::vector<StepRecord> history;

  long total_nfe() const { return nfe + nfe_startup; }
};

struct IntegrateOptions {
  bool record_history = false;
  std::optional<double> dt0;  // skip the starting-step recipe
  long max_steps = 50'000'000;
  /// Abort when the step falls below this fraction of the horizon.
  double underflow = 1e-14;
};

/// Raised when an integration cannot continue; carries the partial report.
class IntegrationAborted : public std::runtime_error {
 public:
  IntegrationAborted(const std::string& what, RunReport partial)
      : std::runtime_error(what), report_(std::move(partial)) {}
  const RunReport& report() const noexcept { return report_; }

 private:
  RunReport report_;
};

RunReport integrate(const Method& method, const Semidiscretization& rhs, const Controller& controller,
                    double t0, double t_end, const State& u0, const IntegrateOptions& opts = {});

}  // namespace lsrk
