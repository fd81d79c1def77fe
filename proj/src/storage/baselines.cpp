#include "carbomarket/storage/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "carbomarket/common/error.hpp"
#include "carbomarket/common/units.hpp"

namespace carbomarket {
namespace {

// Concave piecewise-linear function on [lo, lo + sum(len)], pieces in order
// of decreasing slope.
struct ConcavePwl {
  double lo = 0.0;
  double value_lo = 0.0;
  std::vector<std::pair<double, double>> pieces;  // (length, slope)

  double hi() const {
    double h = lo;
    for (const auto& [len, s] : pieces) h += len;
    return h;
  }

  double Value(double x) const {
    double v = value_lo;
    double at = lo;
    for (const auto& [len, s] : pieces) {
      const double step = std::min(len, x - at);
      if (step <= 0.0) break;
      v += s * step;
      at += len;
    }
    return v;
  }

  std::vector<double> Kinks() const {
    std::vector<double> k{lo};
    double at = lo;
    for (const auto& [len, s] : pieces) {
      at += len;
      k.push_back(at);
    }
    return k;
  }
};

// Best (p_charge, p_discharge) for a given energy change, and its revenue.
struct StageChoice {
  double pc = 0.0;
  double pd = 0.0;
  double revenue = -std::numeric_limits<double>::infinity();
};

StageChoice BestForDelta(double delta, double gamma, const StorageUnit& u, double tau) {
  // pd = (pc tau eta_c - delta) eta_d / tau, both within [0, p_max].
  const double lo = std::max(0.0, delta / (tau * u.eta_c));
  const double hi = std::min(u.p_max, (delta + u.p_max * tau / u.eta_d) / (tau * u.eta_c));
  StageChoice best;
  for (double pc : {lo, hi}) {
    if (pc > hi + 1e-12 || pc < lo - 1e-12) continue;
    const double pd = std::clamp((pc * tau * u.eta_c - delta) * u.eta_d / tau, 0.0, u.p_max);
    const double r = gamma * (pd - pc) * tau * kKwhPerMwh;
    // Prefer the non-simultaneous endpoint on ties.
    if (r > best.revenue + 1e-12 || (r >= best.revenue - 1e-12 && pc == lo)) {
      best = {pc, pd, r};
    }
  }
  return best;
}

ConcavePwl StageReward(double gamma, const StorageUnit& u, double tau) {
  const double dmin = -u.p_max * tau / u.eta_d;
  const double dmax = u.p_max * tau * u.eta_c;
  std::vector<double> xs{dmin, 0.0, dmax, dmax + dmin};
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  ConcavePwl f;
  f.lo = dmin;
  f.value_lo = BestForDelta(dmin, gamma, u, tau).revenue;
  double prev = f.value_lo;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double v = BestForDelta(xs[k], gamma, u, tau).revenue;
    const double len = xs[k] - xs[k - 1];
    if (len > 0.0) f.pieces.push_back({len, (v - prev) / len});
    prev = v;
  }
  return f;
}

// sup_{a + b = x} f(a) + g(b), restricted to [lo, hi].
ConcavePwl SupConvolveRestrict(const ConcavePwl& f, const ConcavePwl& g, double lo,
                               double hi) {
  std::vector<std::pair<double, double>> merged;
  merged.reserve(f.pieces.size() + g.pieces.size());
  std::merge(f.pieces.begin(), f.pieces.end(), g.pieces.begin(), g.pieces.end(),
             std::back_inserter(merged),
             [](const auto& a, const auto& b) { return a.second > b.second; });
  ConcavePwl h;
  h.lo = f.lo + g.lo;
  h.value_lo = f.value_lo + g.value_lo;
  // Advance the start to `lo`.
  std::size_t k = 0;
  while (h.lo < lo && k < merged.size()) {
    const double step = std::min(merged[k].first, lo - h.lo);
    h.value_lo += merged[k].second * step;
    h.lo += step;
    merged[k].first -= step;
    if (merged[k].first <= 1e-15) ++k;
  }
  double at = h.lo;
  for (; k < merged.size() && at < hi; ++k) {
    const double len = std::min(merged[k].first, hi - at);
    if (len <= 1e-15) continue;
    // Merge equal slopes to keep the piece count small.
    if (!h.pieces.empty() && std::abs(h.pieces.back().second - merged[k].second) <= 1e-12) {
      h.pieces.back().first += len;
    } else {
      h.pieces.push_back({len, merged[k].second});
    }
    at += len;
  }
  return h;
}

}  // namespace

OfflineSchedule OfflineOptimal(std::span<const double> gamma, const StorageUnit& u,
                               double tau) {
  const int t_count = static_cast<int>(gamma.size());
  if (!(u.e_max >= u.e_min) || u.e_init < u.e_min - 1e-9 || u.e_init > u.e_max + 1e-9) {
    ThrowData("E_ASSUMPTION", "storage " + u.name + ": initial energy outside bounds");
  }
  // value[t] is the best revenue from period t on as a function of e_t.
  std::vector<ConcavePwl> value(t_count + 1);
  value[t_count].lo = u.e_min;
  value[t_count].pieces = {{u.e_max - u.e_min, 0.0}};
  std::vector<ConcavePwl> stage(t_count);
  for (int t = t_count - 1; t >= 0; --t) {
    stage[t] = StageReward(gamma[t], u, tau);
    // V_t(e) = max_d r_t(d) + V_{t+1}(e + d): reflect r to turn it into a
    // sup-convolution in e.
    ConcavePwl reflected;
    reflected.lo = -stage[t].hi();
    reflected.value_lo = stage[t].Value(stage[t].hi());
    for (auto it = stage[t].pieces.rbegin(); it != stage[t].pieces.rend(); ++it) {
      reflected.pieces.push_back({it->first, -it->second});
    }
    value[t] = SupConvolveRestrict(reflected, value[t + 1], u.e_min, u.e_max);
  }

  OfflineSchedule out;
  double e = std::clamp(u.e_init, u.e_min, u.e_max);
  out.energy.push_back(e);
  for (int t = 0; t < t_count; ++t) {
    const double dmin = std::max(stage[t].lo, u.e_min - e);
    const double dmax = std::min(stage[t].hi(), u.e_max - e);
    std::vector<double> cand{dmin, dmax, 0.0};
    for (double k : stage[t].Kinks()) cand.push_back(k);
    for (double k : value[t + 1].Kinks()) cand.push_back(k - e);
    double best_d = 0.0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (double d : cand) {
      if (d < dmin - 1e-12 || d > dmax + 1e-12) continue;
      d = std::clamp(d, dmin, dmax);
      const double v = stage[t].Value(d) + value[t + 1].Value(e + d);
      if (v > best_v + 1e-9 || (v >= best_v - 1e-9 && std::abs(d) < std::abs(best_d))) {
        best_v = std::max(best_v, v);
        best_d = d;
      }
    }
    const StageChoice c = BestForDelta(best_d, gamma[t], u, tau);
    if (c.pc > 1e-9 && c.pd > 1e-9) out.simultaneous.push_back(t);
    out.power.push_back(c.pd - c.pc);
    out.revenue += c.revenue;
    e = std::clamp(e + best_d, u.e_min, u.e_max);
    out.energy.push_back(e);
  }
  return out;
}

PolicyParams B1Parameters(const StorageUnit& u, double tau) {
  const double denom = u.gamma_hi * u.eta_d - u.gamma_lo / u.eta_c;
  const double num =
      u.e_max - u.e_min - u.p_max * tau * u.eta_c - u.p_max * tau / u.eta_d;
  if (!(denom > 0.0) || !(num > 0.0)) {
    ThrowData("E_ASSUMPTION", "storage " + u.name +
                                  ": energy range too small for the linear policy");
  }
  PolicyParams p;
  p.v = num / denom;
  p.e_offset = u.e_max + p.v * u.gamma_lo / u.eta_c - u.p_max * tau * u.eta_c;
  return p;
}

double B1Power(double q, double gamma, const PolicyParams& params,
               const StorageUnit& u, double tau) {
  // Objective per MW: charging tau (eta_c q + V gamma), discharging
  // tau (-q / eta_d - V gamma).
  const double charge = tau * (u.eta_c * q + params.v * gamma);
  const double discharge = tau * (-q / u.eta_d - params.v * gamma);
  if (charge < 0.0 && charge <= discharge) return -u.p_max;
  if (discharge < 0.0 && discharge < charge) return u.p_max;
  return 0.0;
}

double ClipToEnergy(double p, double e, const StorageUnit& u, double tau) {
  if (p < 0.0) {
    const double room = std::max(0.0, (u.e_max - e) / (tau * u.eta_c));
    return -std::min(-p, room);
  }
  const double avail = std::max(0.0, (e - u.e_min) * u.eta_d / tau);
  return std::min(p, avail);
}

double B2Power(double gamma, double e, const StorageUnit& u, double tau,
               double lo_threshold, double hi_threshold) {
  if (gamma < lo_threshold) return ClipToEnergy(-u.p_max, e, u, tau);
  if (gamma > hi_threshold) return ClipToEnergy(u.p_max, e, u, tau);
  return 0.0;
}

std::pair<double, double> EstimatePriceRange(std::span<const double> gamma, int window) {
  if (gamma.empty()) ThrowData("E_PRICE_HISTORY", "no prices to estimate a range from");
  const std::size_t n = std::min<std::size_t>(gamma.size(), std::max(window, 1));
  const auto [lo, hi] = std::minmax_element(gamma.begin(), gamma.begin() + n);
  return {std::max(0.0, *lo), *hi};
}

}  // namespace carbomarket
