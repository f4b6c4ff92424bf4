#include "lsrk/integrators.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace lsrk {
namespace {

bool finite(const State& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void Stepper::accept() {
  if (pending_valid_) {
    std::swap(cache_, pending_);
    cache_valid_ = true;
  } else {
    cache_valid_ = false;
  }
  pending_valid_ = false;
}

void Stepper::reject() {
  cache_valid_ = false;
  pending_valid_ = false;
}

bool Stepper::eval(const Semidiscretization& rhs, double t, const State& u, State& du, int& nfe) {
  du.resize(u.size());
  ++nfe;
  try {
    rhs.rhs(t, u, du);
  } catch (const InadmissibleState&) {
    return false;
  }
  return finite(du);
}

// ---------------------------------------------------------------------------

ButcherStepper::ButcherStepper(ButcherPair pair) : pair_(std::move(pair)) { pair_.validate(); }

StepResult ButcherStepper::step(const Semidiscretization& rhs, double t, double dt, const State& u) {
  const std::size_t s = pair_.s;
  const std::size_t n = u.size();
  StepResult r;
  k_.resize(s);
  pending_valid_ = false;

  for (std::size_t i = 0; i < s; ++i) {
    if (i == 0 && cache_valid_) {
      k_[0] = cache_;
      continue;
    }
    const State* arg = &u;
    if (i > 0) {
      y_ = u;
      for (std::size_t j = 0; j < i; ++j) {
        const double a = dt * pair_.a(i, j);
        if (a == 0.0) continue;
        for (std::size_t x = 0; x < n; ++x) y_[x] += a * k_[j][x];
      }
      arg = &y_;
    }
    if (!eval(rhs, t + pair_.c[i] * dt, *arg, k_[i], r.nfe)) {
      r.ok = false;
      return r;
    }
  }

  r.u_new = u;
  r.err_diff.assign(n, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const double b = dt * pair_.b[j];
    const double e = dt * (pair_.b[j] - pair_.bhat[j]);
    for (std::size_t x = 0; x < n; ++x) {
      r.u_new[x] += b * k_[j][x];
      r.err_diff[x] += e * k_[j][x];
    }
  }
  if (pair_.fsal) {
    if (!eval(rhs, t + dt, r.u_new, pending_, r.nfe)) {
      r.ok = false;
      return r;
    }
    const double e = dt * pair_.bhat[s];
    for (std::size_t x = 0; x < n; ++x) r.err_diff[x] -= e * pending_[x];
    pending_valid_ = true;
  }
  r.ok = finite(r.u_new) && finite(r.err_diff);
  return r;
}

// ---------------------------------------------------------------------------

LowStorageStepper::LowStorageStepper(LowStorageScheme scheme) : scheme_(std::move(scheme)) {
  scheme_.validate();
}

std::size_t LowStorageStepper::register_count() const {
  return scheme_.cls == SchemeClass::ThreeSStarPlus ? 4 : 3;
}

StepResult LowStorageStepper::step(const Semidiscretization& rhs, double t, double dt,
                                   const State& u) {
  const LowStorageScheme& m = scheme_;
  const bool plus = m.cls == SchemeClass::ThreeSStarPlus;
  const std::size_t n = u.size();
  StepResult r;
  pending_valid_ = false;

  // S1 lives in the output vector and S3 is the caller's u^n
  r.u_new = u;
  State& S1 = r.u_new;
  S2_.assign(n, 0.0);
  if (plus) S4_ = u;

  for (std::size_t i = 0; i < m.s; ++i) {
    const double d = m.delta[i];
    if (d != 0.0)
      for (std::size_t x = 0; x < n; ++x) S2_[x] += d * S1[x];

    const State* k = &k_;
    if (i == 0 && cache_valid_) {
      k = &cache_;
    } else if (!eval(rhs, t + m.c[i] * dt, S1, k_, r.nfe)) {
      r.ok = false;
      return r;
    }
    if (plus) {
      const double bh = dt * m.bhat[i];
      for (std::size_t x = 0; x < n; ++x) S4_[x] += bh * (*k)[x];
    }
    const double g1 = m.gamma1[i], g2 = m.gamma2[i], g3 = m.gamma3[i], bdt = m.beta[i] * dt;
    for (std::size_t x = 0; x < n; ++x)
      S1[x] = g1 * S1[x] + g2 * S2_[x] + g3 * u[x] + bdt * (*k)[x];
  }

  r.err_diff.resize(n);
  if (plus) {
    if (m.fsal()) {
      if (!eval(rhs, t + dt, S1, pending_, r.nfe)) {
        r.ok = false;
        return r;
      }
      const double bh = dt * m.bhat[m.s];
      for (std::size_t x = 0; x < n; ++x) S4_[x] += bh * pending_[x];
      pending_valid_ = true;
    }
    for (std::size_t x = 0; x < n; ++x) r.err_diff[x] = S1[x] - S4_[x];
  } else {
    const double inv = 1.0 / m.delta_sum();
    const double ds = m.delta[m.s], ds1 = m.delta[m.s + 1];
    for (std::size_t x = 0; x < n; ++x)
      r.err_diff[x] = S1[x] - (S2_[x] + ds * S1[x] + ds1 * u[x]) * inv;
  }
  r.ok = finite(r.u_new) && finite(r.err_diff);
  return r;
}

// ---------------------------------------------------------------------------

StepResult Ssp43Stepper::step(const Semidiscretization& rhs, double t, double dt, const State& u) {
  const std::size_t n = u.size();
  const double h = 0.5 * dt;
  StepResult r;
  r.u_new = u;
  State& v = r.u_new;
  auto stage = [&](double tc) {
    if (!eval(rhs, tc, v, k_, r.nfe)) return false;
    for (std::size_t x = 0; x < n; ++x) v[x] += h * k_[x];
    return true;
  };
  if (!stage(t) || !stage(t + h) || !stage(t + dt)) {
    r.ok = false;
    return r;
  }
  uhat_.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    uhat_[x] = u[x] / 3.0 + 2.0 * v[x] / 3.0;
    v[x] = 2.0 * u[x] / 3.0 + v[x] / 3.0;
  }
  if (!stage(t + h)) {
    r.ok = false;
    return r;
  }
  r.err_diff.resize(n);
  for (std::size_t x = 0; x < n; ++x) r.err_diff[x] = v[x] - 0.5 * (uhat_[x] + v[x]);
  r.ok = finite(r.u_new) && finite(r.err_diff);
  return r;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Stepper> make_stepper(const Method& m) {
  if (const auto* p = std::get_if<ButcherPair>(&m)) return std::make_unique<ButcherStepper>(*p);
  if (const auto* l = std::get_if<LowStorageScheme>(&m)) return std::make_unique<LowStorageStepper>(*l);
  return std::make_unique<Ssp43Stepper>();
}

StepResult butcher_step(const ButcherPair& pair, const Semidiscretization& rhs, double t, double dt,
                        const State& u) {
  ButcherStepper st(pair);
  return st.step(rhs, t, dt, u);
}

StepResult lowstorage_step(const LowStorageScheme& scheme, const Semidiscretization& rhs, double t,
                           double dt, const State& u) {
  LowStorageStepper st(scheme);
  return st.step(rhs, t, dt, u);
}

StepResult ssp43_step(const Semidiscretization& rhs, double t, double dt, const State& u) {
  Ssp43Stepper st;
  return st.step(rhs, t, dt, u);
}

// ---------------------------------------------------------------------------

namespace {

std::string describe(const Controller& c) {
  if (const auto* pid = std::get_if<ControllerConfig>(&c)) return pid->describe();
  std::ostringstream os;
  os << "CFL(nu=" << std::get<CflConfig>(c).nu << ")";
  return os.str();
}

}  // namespace

RunReport integrate(const Method& method, const Semidiscretization& rhs, const Controller& controller,
                    double t0, double t_end, const State& u0, const IntegrateOptions& opts) {
  if (!(t_end > t0)) throw std::invalid_argument("integrate: t_end must exceed t0");
  if (u0.size() != rhs.size()) throw std::invalid_argument("integrate: initial state has wrong size");
  if (!rhs.admissible(u0)) throw std::invalid_argument("integrate: initial state is not admissible");

  const auto start = std::chrono::steady_clock::now();
  const double horizon = t_end - t0;
  auto stepper = make_stepper(method);

  RunReport rep;
  rep.scheme = method_name(method);
  rep.controller = describe(controller);
  rep.u_final = u0;
  rep.t_final = t0;
  State& u = rep.u_final;
  double& t = rep.t_final;

  auto abort = [&](const std::string& why) {
    std::ostringstream msg;
    msg << rep.scheme << " with " << rep.controller << " aborted at t = " << t << ": " << why;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    throw IntegrationAborted(msg.str(), rep);
  };
  // stretch the last step slightly rather than leaving a sliver
  auto clip = [&](double dt, bool& last) {
    last = t + dt * (1.0 + 1e-8) >= t_end;
    return last ? t_end - t : dt;
  };

  if (const auto* pid = std::get_if<ControllerConfig>(&controller)) {
    const ControllerConfig& cfg = *pid;
    cfg.validate();
    rep.setting = cfg.rtol > 0.0 ? cfg.rtol : cfg.atol;
    ControllerState cs;
    if (opts.dt0) {
      cs.dt = *opts.dt0;
    } else {
      int calls = 0;
      cs.dt = initial_step(rhs, t0, u0, cfg, method_orders(method).q, horizon, &calls);
      rep.nfe_startup = calls;
    }
    while (t < t_end) {
      if (rep.accepted + rep.rejected >= opts.max_steps) abort("step limit reached");
      if (!(cs.dt >= opts.underflow * horizon)) abort("step size underflow");
      bool last = false;
      const double dt = clip(cs.dt, last);
      StepResult res = stepper->step(rhs, t, dt, u);
      rep.nfe += res.nfe;
      const bool ok = res.ok && rhs.admissible(res.u_new);
      const double w = ok ? error_norm_from_diff(res.u_new, res.err_diff, cfg)
                          : std::numeric_limits<double>::infinity();
      ControllerState trial = cs;
      trial.dt = dt;
      trial.push(w);
      const Proposal prop = pid_propose(trial, cfg);
      const Decision dec = accept_or_reject(prop.factor, ok, dt, prop.dt_next, cfg);
      if (opts.record_history) rep.history.push_back({t, dt, w, dec.accept});
      if (dec.accept) {
        u = std::move(res.u_new);
        t = last ? t_end : t + dt;
        cs = trial;
        cs.dt = dec.dt;
        stepper->accept();
        ++rep.accepted;
      } else {
        cs.dt = dec.dt;
        stepper->reject();
        ++rep.rejected;
      }
    }
  } else {
    const CflConfig& cfg = std::get<CflConfig>(controller);
    cfg.validate();
    rep.setting = cfg.nu;
    while (t < t_end) {
      if (rep.accepted >= opts.max_steps) abort("step limit reached");
      double dt = 0.0;
      try {
        dt = cfl_dt(rhs, u, cfg);
      } catch (const std::domain_error& e) {
        abort(e.what());
      }
      if (!(dt >= opts.underflow * horizon)) abort("step size underflow");
      bool last = false;
      dt = clip(dt, last);
      StepResult res = stepper->step(rhs, t, dt, u);
      rep.nfe += res.nfe;
      if (!res.ok || !rhs.admissible(res.u_new)) abort("nonfinite or inadmissible state");
      if (opts.record_history) rep.history.push_back({t, dt, 0.0, true});
      u = std::move(res.u_new);
      t = last ? t_end : t + dt;
      stepper->accept();
      ++rep.accepted;
    }
  }

  if (rhs.has_exact()) rep.error = rhs.error(t_end, u);
  rep.wall_time = std::max(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1e-9);
  return rep;
}

}  // namespace lsrk
