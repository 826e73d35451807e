// Copyright 2026 The esr-engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "esr/bell.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "esr/probability.hpp"
#include "esr/random.hpp"

namespace esr {

namespace {

// Eigenvalues -3, -1, 1, 3 of the pair observable -> 0..3.
std::size_t pair_index(double value) {
  return static_cast<std::size_t>((std::lround(value) + 3) / 2);
}

int sign_a(std::size_t pair) { return pair >= 2 ? 1 : -1; }
int sign_b(std::size_t pair) { return pair % 2 == 1 ? 1 : -1; }

void require_eta(double eta, const char* which) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    fail(ErrorKind::EtaOutOfRange, std::string(which) + " = " + std::to_string(eta));
  }
}

}  // namespace

BipartiteSettings BipartiteSettings::tsirelson() {
  using std::numbers::pi;
  return {0.0, pi / 2.0, pi / 4.0, -pi / 4.0};
}

const StateVector& singlet() {
  static const StateVector psi = [] {
    CVector v = CVector::Zero(4);
    v(1) = 1.0 / std::sqrt(2.0);
    v(2) = -1.0 / std::sqrt(2.0);
    return StateVector(v);
  }();
  return psi;
}

CMatrix spin_operator(double theta) {
  CMatrix s(2, 2);
  s << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
  return s;
}

GeneralizedObservable pair_observable(double theta_a, double theta_b) {
  const CMatrix id = CMatrix::Identity(2, 2);
  const CMatrix op = 2.0 * tensor(spin_operator(theta_a), id) + tensor(id, spin_operator(theta_b));
  return make_generalized(Observable("pair", op), 0.0);
}

std::array<double, 4> pair_probabilities(double theta_a, double theta_b) {
  const GeneralizedObservable obs = pair_observable(theta_a, theta_b);
  const GeneralizedPureState s("singlet", singlet());
  std::array<double, 4> probs{};
  for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
    probs[pair_index(obs.outcome(k))] =
        conditional_prob(s, PhysicalProperty::singleton(obs, k));
  }
  return probs;
}

double conditional_correlator(double theta_a, double theta_b) {
  const auto probs = pair_probabilities(theta_a, theta_b);
  double e = 0.0;
  for (std::size_t k = 0; k < 4; ++k) e += sign_a(k) * sign_b(k) * probs[k];
  return e;
}

double overall_from_conditional(double e, double eta_a, double eta_b) {
  require_eta(eta_a, "eta_a");
  require_eta(eta_b, "eta_b");
  return eta_a * eta_b * e;
}

double overall_correlator(double theta_a, double theta_b, double eta_a, double eta_b) {
  require_eta(eta_a, "eta_a");
  require_eta(eta_b, "eta_b");
  return overall_from_conditional(conditional_correlator(theta_a, theta_b), eta_a, eta_b);
}

double chsh_value(const BipartiteSettings& s, const Correlator& correlator) {
  return correlator(s.a, s.b) + correlator(s.a, s.b_prime) + correlator(s.a_prime, s.b) -
         correlator(s.a_prime, s.b_prime);
}

double bell_ohs_value(double a, double b, double c, const Correlator& correlator) {
  return std::abs(correlator(a, b) - correlator(a, c)) - correlator(b, c);
}

double classical_bound(InequalityKind kind) {
  return kind == InequalityKind::CHSH ? 2.0 : 1.0;
}

namespace {

double objective(InequalityKind kind, const std::vector<double>& x, const Correlator& e) {
  if (kind == InequalityKind::CHSH) {
    return std::abs(chsh_value({x[0], x[1], x[2], x[3]}, e));
  }
  return bell_ohs_value(x[0], x[1], x[2], e);
}

// Grid maximum with the first angle at 0. `table(i, j)` is E at grid
// angles i and j.
template <typename Table>
Violation grid_search(InequalityKind kind, const Table& table, std::size_t n, double step) {
  Violation best{-1e300, {}};
  if (kind == InequalityKind::CHSH) {
    std::size_t bi = 0, bj = 0, bk = 0;
    for (std::size_t j = 0; j < n; ++j) {      // b
      for (std::size_t k = 0; k < n; ++k) {    // b'
        const double head = table(0, j) + table(0, k);
        for (std::size_t i = 0; i < n; ++i) {  // a'
          const double v = std::abs(head + table(i, j) - table(i, k));
          if (v > best.value) {
            best.value = v;
            bi = i, bj = j, bk = k;
          }
        }
      }
    }
    best.angles = {0.0, bi * step, bj * step, bk * step};
  } else {
    std::size_t bj = 0, bk = 0;
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const double v = std::abs(table(0, j) - table(0, k)) - table(j, k);
        if (v > best.value) {
          best.value = v;
          bj = j, bk = k;
        }
      }
    }
    best.angles = {0.0, bj * step, bk * step};
  }
  return best;
}

// Compass search; the objective is smooth near the optimum so a final step
// of 1e-7 leaves an error far below 1e-12 in the value.
Violation refine(InequalityKind kind, Violation start, const Correlator& e, double step) {
  double best = objective(kind, start.angles, e);
  std::vector<double> x = start.angles;
  while (step > 1e-7) {
    bool improved = false;
    for (std::size_t d = 0; d < x.size(); ++d) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[d] += dir * step;
        const double v = objective(kind, y, e);
        if (v > best) {
          best = v;
          x = std::move(y);
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {best, x};
}

std::vector<double> tabulate(const Correlator& e, std::size_t n, double step) {
  std::vector<double> table(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) table[i * n + j] = e(i * step, j * step);
  }
  return table;
}

std::size_t grid_points(double grid_step) {
  if (!(grid_step > 0.0)) fail(ErrorKind::InvalidArgument, "grid step must be positive");
  return static_cast<std::size_t>(std::llround(2.0 * std::numbers::pi / grid_step));
}

}  // namespace

Violation max_violation(InequalityKind kind, const Correlator& correlator, double grid_step) {
  const std::size_t n = grid_points(grid_step);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  const auto table = tabulate(correlator, n, step);
  const Violation coarse = grid_search(
      kind, [&](std::size_t i, std::size_t j) { return table[i * n + j]; }, n, step);
  return refine(kind, coarse, correlator, step);
}

double critical_efficiency(InequalityKind kind, double search_tol) {
  if (!(search_tol > 0.0)) fail(ErrorKind::InvalidArgument, "search_tol must be positive");
  // The conditional table is computed once; each trial eta rescales it
  // through the overall-correlator rule and then refines with the full
  // overall correlator.
  const std::size_t n = 72;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  const auto conditional = tabulate(conditional_correlator, n, step);
  const double bound = classical_bound(kind);

  auto max_overall = [&](double eta) {
    const Violation coarse = grid_search(
        kind,
        [&](std::size_t i, std::size_t j) {
          return overall_from_conditional(conditional[i * n + j], eta, eta);
        },
        n, step);
    const Correlator e = [eta](double x, double y) { return overall_correlator(x, y, eta, eta); };
    return refine(kind, coarse, e, step).value;
  };

  double lo = 0.0;
  double hi = 1.0;
  if (max_overall(hi) <= bound) return hi;
  while (hi - lo > search_tol) {
    const double mid = 0.5 * (lo + hi);
    if (max_overall(mid) > bound) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

double CorrelationRecord::e_detected() const {
  if (n_both_detected == 0) fail(ErrorKind::UndefinedRatio, "no pair detected on both wings");
  return static_cast<double>(sum_products_detected) / static_cast<double>(n_both_detected);
}

double CorrelationRecord::e_overall() const {
  if (n_produced == 0) fail(ErrorKind::UndefinedRatio, "no pairs produced");
  return static_cast<double>(sum_products_detected) / static_cast<double>(n_produced);
}

double CorrelationRecord::sigma_detected() const {
  const double m = e_detected();
  return std::sqrt(std::max(0.0, 1.0 - m * m) / static_cast<double>(n_both_detected));
}

double CorrelationRecord::sigma_overall() const {
  const double m = e_overall();
  const double second = static_cast<double>(n_both_detected) / static_cast<double>(n_produced);
  return std::sqrt(std::max(0.0, second - m * m) / static_cast<double>(n_produced));
}

std::array<CorrelationRecord, 4> simulate_bell_run(const BipartiteSettings& settings,
                                                   double eta_a, double eta_b,
                                                   std::uint64_t n_pairs, std::uint64_t seed,
                                                   unsigned workers) {
  require_eta(eta_a, "eta_a");
  require_eta(eta_b, "eta_b");
  if (n_pairs == 0) fail(ErrorKind::InvalidArgument, "n_pairs must be at least 1");

  const std::array<std::pair<const char*, std::pair<double, double>>, 4> pairs{{
      {"ab", {settings.a, settings.b}},
      {"ab'", {settings.a, settings.b_prime}},
      {"a'b", {settings.a_prime, settings.b}},
      {"a'b'", {settings.a_prime, settings.b_prime}},
  }};
  const std::uint64_t chunks = (n_pairs + kStreamChunk - 1) / kStreamChunk;
  workers = std::max(1u, workers);

  std::array<CorrelationRecord, 4> out;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto [theta_a, theta_b] = pairs[s].second;
    const auto probs = pair_probabilities(theta_a, theta_b);
    std::vector<CorrelationRecord> per_chunk(chunks);

    auto run_chunk = [&](std::uint64_t c) {
      Engine engine = make_stream(seed, (static_cast<std::uint64_t>(s) << 40) + c);
      CorrelationRecord r;
      const std::uint64_t end = std::min(n_pairs, (c + 1) * kStreamChunk);
      for (std::uint64_t i = c * kStreamChunk; i < end; ++i) {
        const std::size_t k = categorical(engine, probs);
        const bool det_a = bernoulli(engine, eta_a);
        const bool det_b = bernoulli(engine, eta_b);
        const std::size_t ia = det_a ? (sign_a(k) > 0 ? 1 : 0) : 2;
        const std::size_t ib = det_b ? (sign_b(k) > 0 ? 1 : 0) : 2;
        ++r.n_produced;
        ++r.wing_a[ia];
        ++r.wing_b[ib];
        ++r.joint[ia][ib];
        if (det_a && det_b) {
          ++r.n_both_detected;
          r.sum_products_detected += sign_a(k) * sign_b(k);
        }
      }
      per_chunk[c] = r;
    };

    if (workers == 1 || chunks < 2) {
      for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (std::uint64_t c = w; c < chunks; c += workers) run_chunk(c);
        });
      }
      for (auto& t : pool) t.join();
    }

    CorrelationRecord& total = out[s];
    total.setting_pair = pairs[s].first;
    total.theta_a = theta_a;
    total.theta_b = theta_b;
    for (const auto& r : per_chunk) {
      total.n_produced += r.n_produced;
      total.n_both_detected += r.n_both_detected;
      total.sum_products_detected += r.sum_products_detected;
      for (std::size_t i = 0; i < 3; ++i) {
        total.wing_a[i] += r.wing_a[i];
        total.wing_b[i] += r.wing_b[i];
        for (std::size_t j = 0; j < 3; ++j) total.joint[i][j] += r.joint[i][j];
      }
    }
  }
  return out;
}

namespace {

template <typename Value, typename Sigma>
ChshEstimate combine(const std::array<CorrelationRecord, 4>& r, Value value, Sigma sigma) {
  double var = 0.0;
  for (const auto& rec : r) var += sigma(rec) * sigma(rec);
  return {value(r[0]) + value(r[1]) + value(r[2]) - value(r[3]), std::sqrt(var)};
}

}  // namespace

ChshEstimate chsh_detected(const std::array<CorrelationRecord, 4>& records) {
  return combine(
      records, [](const CorrelationRecord& r) { return r.e_detected(); },
      [](const CorrelationRecord& r) { return r.sigma_detected(); });
}

ChshEstimate chsh_overall(const std::array<CorrelationRecord, 4>& records) {
  return combine(
      records, [](const CorrelationRecord& r) { return r.e_overall(); },
      [](const CorrelationRecord& r) { return r.sigma_overall(); });
}

}  // namespace esr
