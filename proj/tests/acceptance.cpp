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


// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "esr/bell.hpp"
#include "esr/composite.hpp"
#include "esr/evolution.hpp"
#include "esr/hiddenvars.hpp"
#include "esr/measurement.hpp"
#include "esr/probability.hpp"
#include "support/random.hpp"

using namespace esr;
using namespace esr::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int number;
  std::string title;
  double time_limit;  // seconds; 0 = none
  std::function<Outcome()> run;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

DetectionModel random_per_outcome(const GeneralizedObservable& obs, Rng& rng, double lo, double hi) {
  std::vector<std::pair<double, double>> table;
  for (std::size_t k = 1; k < obs.outcome_count(); ++k) table.push_back({obs.outcome(k), uniform(rng, lo, hi)});
  return DetectionModel::per_outcome(table);
}

DetectionModel random_detection(const GeneralizedObservable& obs, Rng& rng) {
  if (uniform(rng) < 0.5) return DetectionModel::constant(uniform(rng));
  return random_per_outcome(obs, rng, 0.0, 1.0);
}

// Observable with a known eigenbasis u and spectrum; half the draws are
// degenerate integer spectra.
struct KnownObservable {
  CMatrix u;
  std::vector<double> spectrum;
  GeneralizedObservable obs;
};

KnownObservable known_observable(Eigen::Index dim, Rng& rng) {
  std::vector<double> spectrum(static_cast<std::size_t>(dim));
  const bool degenerate = uniform(rng) < 0.5;
  for (Eigen::Index i = 0; i < dim; ++i) {
    spectrum[i] = degenerate ? static_cast<double>(random_dim(rng, -2, 2)) : 3.0 * i + uniform(rng, 0.0, 2.0);
  }
  const CMatrix u = random_unitary(dim, rng);
  Eigen::VectorXd d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = spectrum[i];
  CMatrix m = u * d.cast<Complex>().asDiagonal() * u.adjoint();
  m = (m + m.adjoint()) * 0.5;
  return {u, spectrum, make_generalized(Observable("A", m))};
}

// --- 1 ---
Outcome qm_recovery() {
  Rng rng(1001);
  double worst = 0.0, worst_a0 = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 8);
    const auto k = known_observable(dim, rng);
    const StateVector psi = random_state(dim, rng);
    const GeneralizedPureState s("S", psi);
    const auto d = DetectionModel::constant(1.0);
    const CVector coeffs = k.u.adjoint() * psi.amplitudes();
    worst_a0 = std::max(worst_a0, std::abs(overall_prob(s, PhysicalProperty::singleton(k.obs, 0), d)));
    for (std::size_t n = 1; n < k.obs.outcome_count(); ++n) {
      double born = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i)
        if (std::abs(k.spectrum[i] - k.obs.outcome(n)) < 1e-6) born += std::norm(coeffs(i));
      worst = std::max(worst, std::abs(overall_prob(s, PhysicalProperty::singleton(k.obs, n), d) - born));
    }
  }
  return {worst <= 1e-12 && worst_a0 == 0.0, "max |ESR - Born| = " + sci(worst) + ", max p_t(a0) = " + sci(worst_a0)};
}

// --- 2 ---
Outcome probability_algebra() {
  Rng rng(1002);
  double product = 0.0, complement_err = 0.0, sum_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 6);
    const auto obs = random_observable(dim, rng);
    const GeneralizedPureState s("S", random_density(dim, random_dim(rng, 1, dim), rng));
    const auto d = random_detection(obs, rng);
    const auto f = random_property(obs, rng, false);
    const double p = conditional_prob(s, f);
    const double p_t = overall_prob(s, f, d);
    if (p > kZeroProbability) product = std::max(product, std::abs(p_t - detection_prob(s, f, d) * p));
    complement_err = std::max(complement_err, std::abs(p_t + overall_prob(s, complement(f), d) - 1.0));
    double total = 0.0;
    for (const auto& o : outcome_distribution(s, obs, d)) total += o.p_t;
    sum_err = std::max(sum_err, std::abs(total - 1.0));
  }
  return {product <= 1e-12 && complement_err <= 1e-12 && sum_err <= 1e-10,
          "product " + sci(product) + ", complement " + sci(complement_err) + ", sum " + sci(sum_err)};
}

// --- 3 ---
Outcome repeatability() {
  Rng rng(1003);
  double repeat = 0.0, a0_branch = 0.0;
  int measured = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 6);
    const auto obs = random_observable(dim, rng);
    const GeneralizedPureState s("S", random_density(dim, random_dim(rng, 1, dim), rng));
    const auto d = random_per_outcome(obs, rng, 0.05, 1.0);
    const std::size_t k = 1 + static_cast<std::size_t>(random_dim(rng, 0, static_cast<Eigen::Index>(obs.outcome_count()) - 2));
    const auto f = PhysicalProperty::singleton(obs, k);
    if (overall_prob(s, f, d) > 1e-9) {
      ++measured;
      const auto post = s.with_rho(glp_update(s, f, d));
      repeat = std::max(repeat, std::abs(conditional_prob(post, f) - 1.0));
    }
    const auto constant = DetectionModel::constant(uniform(rng, 0.0, 0.95));
    const auto branch = glp_update(s, PhysicalProperty::singleton(obs, 0), constant);
    a0_branch = std::max(a0_branch, max_abs(CMatrix(branch.matrix() - s.rho().matrix())));
  }
  return {repeat <= 1e-12 && a0_branch <= 1e-12 && measured > 900,
          "repeat " + sci(repeat) + " over " + std::to_string(measured) + ", a0 branch " + sci(a0_branch)};
}

// --- 4 ---
Outcome axm_diagram() {
  Rng rng(1004);
  double worst = 0.0;
  int cases = 0;
  while (cases < 100) {
    const Eigen::Index dim = random_dim(rng, 2, 3);
    const auto obs = random_observable(dim, rng);
    const auto count = static_cast<Eigen::Index>(obs.outcome_count());
    if (count < 3 || count > 4) continue;
    ++cases;
    const PureState psi{"S", random_state(dim, rng)};
    const auto d = random_detection(obs, rng);
    const PointerBasis pointer(random_unitary(count, rng));
    AxmPhases phases;
    for (Eigen::Index k = 1; k < count; ++k) phases.theta.push_back(uniform(rng, -3.0, 3.0));
    phases.phi0 = uniform(rng, -3.0, 3.0);
    const auto composite = axm_premeasurement(psi, obs, d, pointer, phases);
    const auto reduced = reduced_post_state(composite, {dim, count});
    worst = std::max(worst, max_abs(CMatrix(reduced.matrix() - measurement_transform(psi, obs, d).matrix())));
  }
  return {worst <= 1e-10, "max residual " + sci(worst) + " over " + std::to_string(cases) + " cases"};
}

// --- 5 ---
Outcome nonlinearity() {
  Rng rng(1005);
  double max_purity = 0.0, min_bo = 1.0, blind = 0.0;
  int tested = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 5);
    const auto obs = make_generalized(Observable("A", random_hermitian(dim, rng)));
    const StateVector psi = random_state(dim, rng);
    // Skip (near-)eigenstates: the theorem concerns superpositions.
    double largest = 0.0;
    for (std::size_t k = 1; k < obs.outcome_count(); ++k)
      largest = std::max(largest, std::real(expectation(DensityOperator::from_pure(psi), obs.projector(k).matrix())));
    if (largest > 1.0 - 1e-3) continue;
    ++tested;
    const auto d = trial % 2 ? DetectionModel::constant(uniform(rng, 0.05, 0.95))
                             : random_per_outcome(obs, rng, 0.05, 0.95);
    const auto count = static_cast<Eigen::Index>(obs.outcome_count());
    const PointerBasis pointer = PointerBasis::canonical(count);
    const auto report =
        nonlinearity_certificate(reduced_post_state(axm_premeasurement({"S", psi}, obs, d, pointer), {dim, count}), obs);
    max_purity = std::max(max_purity, report.purity);
    min_bo = std::min(min_bo, report.bo_violation);

    const auto none = nonlinearity_certificate(
        reduced_post_state(axm_premeasurement({"S", psi}, obs, DetectionModel::constant(0.0), pointer), {dim, count}), obs);
    blind = std::max(blind, std::abs(none.purity - 1.0));
  }
  return {max_purity < 1.0 - 1e-6 && min_bo > 1e-6 && blind <= 1e-9 && tested > 900,
          "max purity " + sci(max_purity) + ", min bo residual " + sci(min_bo) + ", |purity - 1| at p_n = 0 " +
              sci(blind) + " over " + std::to_string(tested) + " states"};
}

// --- 6 ---
// Micro model of pure state psi under per-outcome detection: microstate k
// possesses f_k with weight p(S, F_k); every microstate detects f_j with eta_j.
MicroModel matched_model(const GeneralizedPureState& s, const GeneralizedObservable& obs,
                         const std::vector<double>& eta) {
  std::vector<MicroProperty> props;
  std::vector<MicroState> states;
  std::vector<double> weights;
  MicroModel::DetectionTable detect;
  const std::size_t w = obs.outcome_count() - 1;
  for (std::size_t k = 1; k <= w; ++k) {
    const std::string id = "f" + std::to_string(k);
    props.push_back({id, PhysicalProperty::singleton(obs, k)});
    states.push_back({{id}});
    weights.push_back(conditional_prob(s, PhysicalProperty::singleton(obs, k)));
  }
  double total = 0.0;
  for (double x : weights) total += x;
  for (double& x : weights) x /= total;
  for (std::size_t i = 0; i < w; ++i)
    for (std::size_t k = 1; k <= w; ++k) detect[{i, "f" + std::to_string(k)}] = eta[k - 1];
  return MicroModel(props, states, {{s.label(), weights}}, detect, false);
}

Outcome hidden_variables() {
  Rng rng(1006);
  double analytic = 0.0, worst_z = 0.0;
  std::size_t discrepancies = 0;
  bool deterministic = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 4);
    const auto obs = random_observable(dim, rng);
    const GeneralizedPureState s("S", random_state(dim, rng));
    std::vector<double> eta;
    std::vector<std::pair<double, double>> table;
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      eta.push_back(uniform(rng, 0.1, 1.0));
      table.push_back({obs.outcome(k), eta.back()});
    }
    const auto d = DetectionModel::per_outcome(table);
    const MicroModel model = matched_model(s, obs, eta);
    std::vector<PhysicalProperty> props;
    for (std::size_t k = 1; k < obs.outcome_count(); ++k) {
      props.push_back(PhysicalProperty::singleton(obs, k));
      props.push_back(complement(props.back()));
    }
    const auto macro = macro_table({s}, props, d);
    discrepancies += consistency_check(model, macro, 1e-12).size();
    for (const auto& e : macro) {
      if (e.property.contains_a0()) {
        analytic = std::max(analytic, std::abs(aggregate_complement(model, "S", e.property) - e.p_t));
        continue;
      }
      const auto a = aggregate(model, "S", e.property);
      analytic = std::max(analytic, std::abs(a.p_t - e.p_t));
      if (e.p_d) analytic = std::max(analytic, std::abs(a.p_d - *e.p_d));
      if (e.p) analytic = std::max(analytic, std::abs(a.p - *e.p));
    }

    const auto f = PhysicalProperty::singleton(obs, 1);
    const auto a = aggregate(model, "S", f);
    const std::uint64_t n = 100000;
    const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(trial);
    const auto tally = sample_many(model, "S", f, n, seed, 2);
    const auto again = sample_many(model, "S", f, n, seed, 1);
    deterministic = deterministic && tally.detected == again.detected && tally.displayed == again.displayed;
    auto z = [](double got, double p, double trials) {
      const double sigma = std::sqrt(p * (1.0 - p) / trials);
      return sigma > 0.0 ? std::abs(got - p) / sigma : (got == p ? 0.0 : 1e9);
    };
    const double nd = static_cast<double>(n);
    worst_z = std::max({worst_z, z(tally.p_t(), a.p_t, nd), z(tally.p_d(), a.p_d, nd),
                        z(tally.p(), a.p, static_cast<double>(tally.detected))});
  }
  return {analytic <= 1e-12 && discrepancies == 0 && worst_z <= 4.0 && deterministic,
          "analytic " + sci(analytic) + ", max |z| " + sci(worst_z) + ", reruns " +
              (deterministic ? "identical" : "differ")};
}

// --- 7 ---
Outcome bell_thresholds() {
  const double chsh = critical_efficiency(InequalityKind::CHSH, 1e-6);
  const double bell = critical_efficiency(InequalityKind::BellOriginal, 1e-6);
  const double tsirelson = 2.0 * std::sqrt(2.0);
  const auto settings = BipartiteSettings::tsirelson();
  const double analytic = std::abs(chsh_value(settings, conditional_correlator));
  // Detected subensemble at full and at 0.8 efficiency.
  double z = 0.0;
  for (double eta : {1.0, 0.8}) {
    const auto mc = chsh_detected(simulate_bell_run(settings, eta, eta, 100000, 7, 2));
    z = std::max(z, std::abs(std::abs(mc.value) - tsirelson) / mc.sigma);
  }
  const bool ok = std::abs(chsh - std::pow(2.0, -0.25)) <= 1e-4 && std::abs(bell - std::sqrt(2.0 / 3.0)) <= 1e-4 &&
                  std::abs(chsh - 0.841) <= 5e-4 && std::abs(bell - 0.8165) <= 5e-4 &&
                  std::abs(analytic - tsirelson) <= 1e-6 && z <= 4.0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "eta_CHSH = %.5f, eta_Bell = %.5f, |S| analytic = %.7f, MC max z = %.2f", chsh, bell,
                analytic, z);
  return {ok, buf};
}

// --- 8 ---
Outcome evolution() {
  Rng rng(1008);
  double group = 0.0, conservation = 0.0, liouville = 0.0;
  bool weights = true;
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index dim = random_dim(rng, 2, 8);
    CMatrix m = random_hermitian(dim, rng);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
    const double norm = uniform(rng, 0.1, 4.0);
    m *= norm / solver.eigenvalues().cwiseAbs().maxCoeff();
    const Hamiltonian h(m);
    const auto rho = random_density(dim, random_dim(rng, 1, dim), rng);
    const double t1 = uniform(rng, 0.0, 5.0 / norm), t2 = uniform(rng, 0.0, 5.0 / norm);
    const auto direct = evolve_closed(rho, h, t1 + t2);
    group = std::max(group, max_abs(CMatrix(direct.matrix() - evolve_closed(evolve_closed(rho, h, t1), h, t2).matrix())));
    conservation = std::max({conservation, std::abs(direct.matrix().trace() - 1.0),
                             std::abs(expectation(direct, m) - expectation(rho, m))});
    liouville = std::max(liouville, liouville_residual(rho, h, t1 + t2));

    const double p = uniform(rng, 0.05, 0.95);
    const ProperMixture mix("M", {{p, GeneralizedPureState("a", random_state(dim, rng))},
                                  {1.0 - p, GeneralizedPureState("b", rho)}});
    const auto evolved = evolve_proper_mixture(mix, h, t1);
    weights = weights && evolved.components()[0].weight == p && evolved.components()[1].weight == 1.0 - p;
  }
  return {group <= 1e-9 && conservation <= 1e-9 && liouville <= 1e-6 && weights,
          "group " + sci(group) + ", conservation " + sci(conservation) + ", Liouville " + sci(liouville) +
              ", weights " + (weights ? "bit-identical" : "changed")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "QM recovery", 5.0, qm_recovery},
      {2, "probability algebra", 0.0, probability_algebra},
      {3, "measurement repeatability", 0.0, repeatability},
      {4, "AXM diagram", 10.0, axm_diagram},
      {5, "nonlinearity theorem", 0.0, nonlinearity},
      {6, "hidden-variable aggregation", 30.0, hidden_variables},
      {7, "Bell/CHSH thresholds", 60.0, bell_thresholds},
      {8, "evolution", 0.0, evolution},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit == 0.0 || seconds < c.time_limit;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %d %s: %s; %.2f s%s\n", pass ? "PASS" : "FAIL", c.number, c.title.c_str(), o.detail.c_str(),
                seconds, in_time ? "" : " (over time limit)");
  }
  return failures == 0 ? 0 : 1;
}
