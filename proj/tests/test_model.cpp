#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "jobval/model.hpp"
#include "jobval/rng.hpp"

using namespace jobval;

namespace {

// Plain value iteration written without the library's scaled-space
// helpers: direct exp/log expectations in preference space.
ValueVector naive_solve(const EconomyParams& p, const std::vector<double>& u, double tol,
                        int iters) {
    int J = p.J;
    std::vector<double> V(J, 0.0);
    double VN = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> Vn(J);
        auto emax2 = [&](double a, double b) {
            return (std::log(std::exp(p.sigma * a) + std::exp(p.sigma * b)) + kEulerGamma) /
                   p.sigma;
        };
        double offer_mean = 0.0;
        for (int k = 0; k < J; ++k) offer_mean += p.f[k] * (V[k] + kEulerGamma / p.sigma);
        for (int j = 0; j < J; ++j) {
            double sj = 1.0 - p.delta[j] - p.rho[j];
            double search = 0.0;
            for (int k = 0; k < J; ++k) search += p.f[k] * emax2(V[j], V[k]);
            double cont = p.delta[j] * (VN + kEulerGamma / p.sigma) + p.rho[j] * offer_mean +
                          sj * p.lambda1 * search + sj * (1.0 - p.lambda1) * emax2(VN, V[j]);
            Vn[j] = u[j] + p.beta * cont;
        }
        double acc = 0.0;
        for (int k = 0; k < J; ++k) acc += p.f[k] * emax2(V[k], VN);
        double VNn = p.u_N + p.beta * (p.lambda0 * acc + (1.0 - p.lambda0) * (VN + kEulerGamma / p.sigma));
        double r = std::abs(VNn - VN);
        for (int j = 0; j < J; ++j) r = std::max(r, std::abs(Vn[j] - V[j]));
        V = Vn;
        VN = VNn;
        if (r < tol) break;
    }
    return ValueVector(V, VN, false);
}

EconomyParams five_employer_params() {
    EconomyParams p;
    p.J = 5;
    p.psi = {0.10, -0.05, 0.20, 0.00, -0.15};
    p.a = {-0.05, 0.12, -0.10, 0.03, 0.20};
    p.delta = {0.02, 0.05, 0.03, 0.04, 0.06};
    p.rho = {0.01, 0.02, 0.015, 0.03, 0.01};
    p.f = {0.3, 0.25, 0.2, 0.15, 0.1};
    p.lambda0 = 0.4;
    p.lambda1 = 0.15;
    p.beta = 1.0 / 1.05;
    p.sigma = 1.3;
    p.u_N = -0.3;
    return p;
}

}  // namespace

TEST_CASE("acceptance probability closed forms") {
    CHECK(acceptance_probability(1.0, 1.0) == 0.5);
    CHECK_THAT(acceptance_probability(1.0, std::exp(1.0)),
               Catch::Matchers::WithinAbs(std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-12));
    CHECK_THROWS_AS(acceptance_probability(0.0, 1.0), ContractError);
    CHECK_THROWS_AS(acceptance_probability(1.0, -2.0), ContractError);
    CHECK_THROWS_AS(acceptance_probability(1.0, std::numeric_limits<double>::infinity()),
                    ContractError);
}

TEST_CASE("acceptance probabilities complement exactly") {
    Rng rng(123);
    for (int i = 0; i < 2000; ++i) {
        double x = std::exp(rng.uniform(-40.0, 40.0));
        double y = std::exp(rng.uniform(-40.0, 40.0));
        CHECK(acceptance_probability(x, y) + acceptance_probability(y, x) == 1.0);
        CHECK(acceptance_probability(x, y) > 0.0);
        CHECK(acceptance_probability(x, y) < 1.0);
    }
}

TEST_CASE("acceptance probability matches Monte Carlo") {
    const double vo = 0.3, vd = 0.8;
    Rng rng(77);
    int accept = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        double eo = rng.gumbel();
        double ed = rng.gumbel();
        if (vd + ed >= vo + eo) ++accept;
    }
    double empirical = static_cast<double>(accept) / n;
    double predicted = acceptance_probability(std::exp(vo), std::exp(vd));
    CHECK_THAT(empirical, Catch::Matchers::WithinAbs(predicted, 0.005));
}

TEST_CASE("gumbel expected max closed forms") {
    CHECK_THAT(gumbel_expected_max({0.0}), Catch::Matchers::WithinAbs(kEulerGamma, 1e-15));
    CHECK_THAT(gumbel_expected_max({0.0, 0.0}),
               Catch::Matchers::WithinAbs(std::log(2.0) + kEulerGamma, 1e-15));
    CHECK_THROWS_AS(gumbel_expected_max({}), ContractError);
}

TEST_CASE("gumbel expected max matches Monte Carlo") {
    std::vector<double> vals = {0.5, 1.5, -0.2};
    Rng rng(991);
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        double m = -1e300;
        for (double v : vals) m = std::max(m, v + rng.gumbel());
        sum += m;
    }
    CHECK_THAT(sum / n, Catch::Matchers::WithinAbs(gumbel_expected_max(vals), 0.005));
}

TEST_CASE("gumbel expected max is permutation invariant and monotone") {
    std::vector<double> vals = {0.3, -1.2, 2.0, 0.0};
    std::vector<double> perm = {2.0, 0.3, 0.0, -1.2};
    CHECK_THAT(gumbel_expected_max(vals), Catch::Matchers::WithinAbs(gumbel_expected_max(perm), 1e-14));
    std::vector<double> bumped = vals;
    bumped[1] += 0.5;
    CHECK(gumbel_expected_max(bumped) > gumbel_expected_max(vals));
}

TEST_CASE("gumbel expected max collapses to dominant entry") {
    // When one entry dominates by >= 40, the others contribute < 1e-17.
    std::vector<double> vals = {3.0, -37.0, -50.0};
    CHECK_THAT(gumbel_expected_max(vals), Catch::Matchers::WithinAbs(3.0 + kEulerGamma, 1e-15));
}

TEST_CASE("expected flows vanish without mobility channels") {
    EconomyParams p = five_employer_params();
    for (int j = 0; j < p.J; ++j) p.delta[j] = p.rho[j] = 0.0;
    p.lambda1 = 0.0;
    ValueVector v(std::vector<double>(5, 0.5), 0.0, false);
    std::vector<double> L(5, 10.0);
    auto flows = expected_flows(p, v, L, 5.0);
    for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) CHECK(flows.ee(j, k) == 0.0);
        // With lambda1 = 0 the voluntary quit channel is open.
        CHECK(flows.en[j] >= 0.0);
    }
}

TEST_CASE("expected flows are symmetric for identical employers") {
    EconomyParams p;
    p.J = 2;
    p.psi = {0.1, 0.1};
    p.a = {0.0, 0.0};
    p.delta = {0.02, 0.02};
    p.rho = {0.01, 0.01};
    p.f = {0.5, 0.5};
    p.lambda0 = 0.3;
    p.lambda1 = 0.2;
    p.sigma = 1.0;
    ValueVector v({1.0, 1.0}, 0.0, false);
    std::vector<double> L = {50.0, 50.0};
    auto flows = expected_flows(p, v, L, 20.0);
    CHECK(flows.ee(0, 1) == flows.ee(1, 0));
}

TEST_CASE("expected flows match the two-employer hand case") {
    EconomyParams p;
    p.J = 2;
    p.psi = {0.0, 0.0};
    p.a = {0.0, 0.0};
    p.delta = {0.0, 0.0};
    p.rho = {0.0, 0.0};
    p.f = {0.5, 0.5};
    p.lambda0 = 0.0;
    p.lambda1 = 0.2;
    p.sigma = 1.0;
    ValueVector v({0.0, 1.0}, 0.0, false);  // sigma = 1 so sigma*V = V
    std::vector<double> L = {100.0, 100.0};
    auto flows = expected_flows(p, v, L, 0.0);
    double e = std::exp(1.0);
    CHECK_THAT(flows.ee(0, 1), Catch::Matchers::WithinAbs(100.0 * 0.2 * 0.5 * e / (1.0 + e), 1e-10));
    CHECK_THAT(flows.ee(1, 0), Catch::Matchers::WithinAbs(100.0 * 0.2 * 0.5 * 1.0 / (1.0 + e), 1e-10));
}

TEST_CASE("expected flows conserve mass") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector v = solve_values(p, u);
    std::vector<double> L = {30.0, 20.0, 25.0, 15.0, 10.0};
    auto flows = expected_flows(p, v, L, 12.0);
    for (int j = 0; j < p.J; ++j) {
        double out = flows.en[j];
        for (int k = 0; k < p.J; ++k) out += flows.ee(j, k);
        double stayers = L[j] - out;
        CHECK(out <= L[j] + 1e-12);
        CHECK(stayers >= 0.0);
    }
}

TEST_CASE("solve_values reduces to flow utility when beta is tiny") {
    EconomyParams p = five_employer_params();
    p.beta = 1e-12;
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector v = solve_values(p, u);
    for (int j = 0; j < p.J; ++j) CHECK_THAT(v.v[j], Catch::Matchers::WithinAbs(u.u[j], 1e-9));
    CHECK_THAT(v.v_n, Catch::Matchers::WithinAbs(p.u_N, 1e-9));
}

TEST_CASE("solve_values gives equal values for identical employers") {
    EconomyParams p = five_employer_params();
    for (int j = 0; j < p.J; ++j) {
        p.delta[j] = 0.03;
        p.rho[j] = 0.02;
    }
    std::vector<double> u(p.J, 0.25);
    FlowUtility fu;
    fu.u = u;
    ValueVector v = solve_values(p, fu);
    for (int j = 1; j < p.J; ++j) CHECK_THAT(v.v[j], Catch::Matchers::WithinAbs(v.v[0], 1e-10));
}

TEST_CASE("solve_values matches a naive value-iteration oracle") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector got = solve_values(p, u);
    ValueVector want = naive_solve(p, u.u, 1e-13, 200000);
    for (int j = 0; j < p.J; ++j)
        CHECK_THAT(got.v[j], Catch::Matchers::WithinAbs(want.v[j], 1e-9));
    CHECK_THAT(got.v_n, Catch::Matchers::WithinAbs(want.v_n, 1e-9));
}

TEST_CASE("solve_values iterates contract at rate beta") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    std::vector<double> resid;
    solve_values(p, u, &resid);
    for (size_t i = 1; i < resid.size(); ++i) {
        if (resid[i - 1] < 1e-13) break;  // float noise floor
        CHECK(resid[i] <= p.beta * resid[i - 1] + 1e-13);
    }
}

TEST_CASE("constant utility shifts move values by c/(1-beta)") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector base = solve_values(p, u);
    const double c = 0.7;
    EconomyParams p2 = p;
    p2.u_N += c;
    FlowUtility u2 = u;
    for (double& x : u2.u) x += c;
    ValueVector shifted = solve_values(p2, u2);
    double expect = c / (1.0 - p.beta);
    for (int j = 0; j < p.J; ++j)
        CHECK_THAT(shifted.v[j] - base.v[j], Catch::Matchers::WithinAbs(expect, 1e-7));
    CHECK_THAT(shifted.v_n - base.v_n, Catch::Matchers::WithinAbs(expect, 1e-7));

    // Flows are location invariant.
    std::vector<double> L = {30.0, 20.0, 25.0, 15.0, 10.0};
    auto f1 = expected_flows(p, base, L, 12.0);
    auto f2 = expected_flows(p2, shifted, L, 12.0);
    for (int j = 0; j < p.J; ++j)
        for (int k = 0; k < p.J; ++k)
            CHECK_THAT(f2.ee(j, k), Catch::Matchers::WithinAbs(f1.ee(j, k), 1e-8));
}

TEST_CASE("invert_flow_utility round trips solve_values") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector v = solve_values(p, u);
    FlowUtility rec = invert_flow_utility(p, v);
    for (int j = 0; j < p.J; ++j)
        CHECK_THAT(rec.u[j], Catch::Matchers::WithinAbs(u.u[j], 1e-8));
}

TEST_CASE("invert_flow_utility on symmetric economy gives equal utilities") {
    EconomyParams p = five_employer_params();
    for (int j = 0; j < p.J; ++j) {
        p.delta[j] = 0.03;
        p.rho[j] = 0.02;
    }
    ValueVector v(std::vector<double>(p.J, 2.0), 0.4, false);
    FlowUtility rec = invert_flow_utility(p, v);
    for (int j = 1; j < p.J; ++j)
        CHECK_THAT(rec.u[j], Catch::Matchers::WithinAbs(rec.u[0], 1e-12));
}

TEST_CASE("invert_flow_utility equals values when beta is tiny") {
    EconomyParams p = five_employer_params();
    p.beta = 1e-12;
    ValueVector v({0.5, -0.3, 1.1, 0.0, 0.2}, -0.1, false);
    FlowUtility rec = invert_flow_utility(p, v);
    for (int j = 0; j < p.J; ++j)
        CHECK_THAT(rec.u[j], Catch::Matchers::WithinAbs(v.v[j], 1e-9));
}

TEST_CASE("scaled and preference space inversions agree") {
    EconomyParams p = five_employer_params();
    FlowUtility u = FlowUtility::from_components(p.psi, p.a);
    ValueVector v = solve_values(p, u);
    std::vector<double> sv(p.J);
    for (int j = 0; j < p.J; ++j) sv[j] = p.sigma * v.v[j];
    ValueVector scaled(sv, p.sigma * v.v_n, true);
    FlowUtility su = invert_flow_utility(p, scaled);
    FlowUtility uu = invert_flow_utility(p, v);
    for (int j = 0; j < p.J; ++j)
        CHECK_THAT(su.u[j] / p.sigma, Catch::Matchers::WithinAbs(uu.u[j], 1e-12));
}
