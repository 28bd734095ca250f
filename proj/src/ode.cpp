#include "dgn/ode.hpp"

#include <algorithm>
#include <cmath>

#include "dgn/error.hpp"

namespace dgn {

namespace {

struct Event {
  double time;
  Index channel;
};

std::vector<Event> collect_events(
    const std::vector<std::vector<double>>& spike_times, double t_end) {
  std::vector<Event> events;
  for (Index c = 0; c < static_cast<Index>(spike_times.size()); ++c) {
    for (double t : spike_times[c]) {
      require(t >= 0.0, "ode reference: negative spike time");
      if (t < t_end) events.push_back({t, c});
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  return events;
}

// RK4 over [0, h] with the trace known in closed form:
// D(s) = D0 * exp(-s/tau_s). `rhs(V, D)` is the membrane derivative.
template <class Rhs>
void rk4_segment(double& V, Vector& D, double h, double tau_s, Rhs&& rhs) {
  if (h <= 0.0) return;
  const Vector D_mid = D * std::exp(-0.5 * h / tau_s);
  const Vector D_end = D * std::exp(-h / tau_s);
  const double k1 = rhs(V, D);
  const double k2 = rhs(V + 0.5 * h * k1, D_mid);
  const double k3 = rhs(V + 0.5 * h * k2, D_mid);
  const double k4 = rhs(V + h * k3, D_end);
  V += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  D = D_end;
}

template <class Rhs>
Vector integrate(const std::vector<std::vector<double>>& spike_times,
                 Index channels, double tau_s, double t_end, double dt_fine,
                 double v0, Rhs&& rhs) {
  require(dt_fine > 0.0, "ode reference: dt_fine must be > 0");
  require(tau_s > 0.0, "ode reference: tau_s must be > 0");
  require(dt_fine <= tau_s / 10.0 + 1e-15,
          "ode reference: dt_fine must not exceed tau_s / 10");
  require(static_cast<Index>(spike_times.size()) == channels,
          "ode reference: spike_times size does not match channel count");
  const double steps_real = t_end / dt_fine;
  const auto n_steps = static_cast<Index>(std::llround(steps_real));
  require(n_steps >= 1 && std::abs(steps_real - static_cast<double>(n_steps)) <
                              1e-9 * std::max(1.0, steps_real),
          "ode reference: t_end must be an integral multiple of dt_fine");

  auto events = collect_events(spike_times, t_end);
  std::size_t next_event = 0;

  double V = v0;
  Vector D = Vector::Zero(channels);
  Vector out(n_steps + 1);
  out[0] = V;

  double t = 0.0;
  // Apply any events at exactly t = 0 before the first segment.
  while (next_event < events.size() && events[next_event].time <= t) {
    D[events[next_event].channel] += 1.0;
    ++next_event;
  }
  for (Index k = 1; k <= n_steps; ++k) {
    const double t_next = static_cast<double>(k) * dt_fine;
    while (next_event < events.size() && events[next_event].time < t_next) {
      const double te = events[next_event].time;
      rk4_segment(V, D, te - t, tau_s, rhs);
      t = te;
      D[events[next_event].channel] += 1.0;
      ++next_event;
    }
    rk4_segment(V, D, t_next - t, tau_s, rhs);
    t = t_next;
    out[k] = V;
  }
  return out;
}

}  // namespace

Vector ode_reference_dgn(const std::vector<std::vector<double>>& spike_times,
                         const OdeDgnConfig& cfg, double t_end,
                         double dt_fine, double v0) {
  require(cfg.W.size() == cfg.C.size(),
          "ode_reference_dgn: W and C must have equal length");
  return integrate(spike_times, cfg.W.size(), cfg.tau_s, t_end, dt_fine, v0,
                   [&](double V, const Vector& D) {
                     return -(cfg.g_l + cfg.C.dot(D)) * V + cfg.W.dot(D);
                   });
}

Vector ode_reference_conductance(
    const std::vector<std::vector<double>>& spike_times, const Vector& C,
    const Vector& E, double g_l, double tau_s, double t_end, double dt_fine,
    double v0) {
  require(C.size() == E.size(),
          "ode_reference_conductance: C and E must have equal length");
  return integrate(spike_times, C.size(), tau_s, t_end, dt_fine, v0,
                   [&](double V, const Vector& D) {
                     // Evaluated in the conductance form g_i (E_i - V) on
                     // purpose; agreement with the gated form is a check of
                     // the algebraic identity, not of shared code.
                     double dv = -g_l * V;
                     for (Index i = 0; i < C.size(); ++i)
                       dv += C[i] * D[i] * (E[i] - V);
                     return dv;
                   });
}

}  // namespace dgn
