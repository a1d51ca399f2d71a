#pragma once

#include <cmath>
#include <vector>

#include "jobval/common.hpp"
#include "jobval/economy.hpp"

namespace jobval {

// Probability that an offer with surplus weight S_dest is accepted
// against a current position with weight S_origin, where S = exp(sigma*V).
// The destination weight sits in the numerator: Pr = S_dest / (S_origin + S_dest).
// Computed so that acceptance_probability(x,y) + acceptance_probability(y,x)
// is exactly 1.
inline double acceptance_probability(double s_origin, double s_dest) {
    require(std::isfinite(s_origin) && s_origin > 0.0,
            "acceptance_probability: origin weight must be positive and finite");
    require(std::isfinite(s_dest) && s_dest > 0.0,
            "acceptance_probability: destination weight must be positive and finite");
    double c = s_origin + s_dest;
    // Clamping the small side at 2^-53 keeps the result inside (0,1):
    // 1 - 2^-53 is the predecessor of 1 and (1 - 2^-53) + 2^-53 == 1.
    double small = std::max(std::min(s_origin, s_dest) / c, 0x1p-53);
    return (s_dest <= s_origin) ? small : 1.0 - small;
}

// Same probability from scaled values sigma*V, overflow-safe for
// |sigma*V| up to ~700.
inline double acceptance_prob_scaled(double sv_origin, double sv_dest) {
    return logistic(sv_dest - sv_origin);
}

// E[max_i {V_i + eps_i}] in sigma-scaled space: log-sum-exp of the
// scaled values plus Euler's constant.
inline double gumbel_expected_max(const std::vector<double>& scaled_values) {
    require(!scaled_values.empty(), "gumbel_expected_max: empty input");
    for (double v : scaled_values)
        require(std::isfinite(v), "gumbel_expected_max: non-finite entry");
    return log_sum_exp(scaled_values) + kEulerGamma;
}

namespace detail {

// One application of the sigma-scaled continuation operator of the
// value recursion. Input and output are scaled values.
inline void scaled_continuation(const EconomyParams& p, const std::vector<double>& sv,
                                double sv_n, std::vector<double>& cont_out,
                                double& cont_n_out) {
    const int J = p.J;
    // E[V_k + eps_k] averaged over offers, shared by all origins.
    double mean_offer_value = 0.0;
    for (int k = 0; k < J; ++k) mean_offer_value += p.f[k] * (sv[k] + kEulerGamma);

    for (int j = 0; j < J; ++j) {
        double sj = p.s(j);
        double search_term = 0.0;
        for (int k = 0; k < J; ++k)
            search_term += p.f[k] * (log_add_exp(sv[j], sv[k]) + kEulerGamma);
        double quit_term = log_add_exp(sv_n, sv[j]) + kEulerGamma;
        cont_out[j] = p.delta[j] * (sv_n + kEulerGamma) + p.rho[j] * mean_offer_value +
                      sj * p.lambda1 * search_term + sj * (1.0 - p.lambda1) * quit_term;
    }
    double accept_term = 0.0;
    for (int k = 0; k < J; ++k)
        accept_term += p.f[k] * (log_add_exp(sv[k], sv_n) + kEulerGamma);
    cont_n_out = p.lambda0 * accept_term + (1.0 - p.lambda0) * (sv_n + kEulerGamma);
}

}  // namespace detail

// Solves the value recursion by iteration in sigma-scaled space.
// Returns preference-space values. The map is a beta-contraction in the
// sup norm, so convergence is geometric. residual_log, when given,
// receives the sup-norm distance between successive iterates.
inline ValueVector solve_values(const EconomyParams& p, const FlowUtility& u,
                                std::vector<double>* residual_log = nullptr,
                                double tol = 1e-12, int max_iter = 100000) {
    p.validate();
    require(static_cast<int>(u.u.size()) == p.J, "solve_values: utility length mismatch");
    for (double x : u.u) require(std::isfinite(x), "solve_values: non-finite utility");

    const int J = p.J;
    std::vector<double> su(J);
    for (int j = 0; j < J; ++j) su[j] = p.sigma * u.u[j];
    const double su_n = p.sigma * p.u_N;

    std::vector<double> sv(J, 0.0), cont(J, 0.0), next(J, 0.0);
    double sv_n = 0.0, cont_n = 0.0;
    double resid = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        detail::scaled_continuation(p, sv, sv_n, cont, cont_n);
        resid = 0.0;
        for (int j = 0; j < J; ++j) {
            next[j] = su[j] + p.beta * cont[j];
            resid = std::max(resid, std::abs(next[j] - sv[j]));
        }
        double next_n = su_n + p.beta * cont_n;
        resid = std::max(resid, std::abs(next_n - sv_n));
        sv.swap(next);
        sv_n = next_n;
        if (residual_log) residual_log->push_back(resid);
        if (resid < tol) {
            std::vector<double> v(J);
            for (int j = 0; j < J; ++j) v[j] = sv[j] / p.sigma;
            return ValueVector(std::move(v), sv_n / p.sigma, /*is_scaled=*/false);
        }
    }
    throw NumericError("solve_values: no convergence after " + std::to_string(max_iter) +
                       " iterations, last residual " + std::to_string(resid));
}

// Algebraic inverse of one recursion step: recovers flow utilities from
// values. Output lives in the same space as the input ValueVector
// (scaled in -> sigma*u out, preference in -> u out).
inline FlowUtility invert_flow_utility(const EconomyParams& p, const ValueVector& values) {
    require(static_cast<int>(values.size()) == p.J,
            "invert_flow_utility: value length mismatch");
    const int J = p.J;
    std::vector<double> sv(J);
    double sv_n;
    if (values.scaled) {
        sv = values.v;
        sv_n = values.v_n;
    } else {
        for (int j = 0; j < J; ++j) sv[j] = p.sigma * values.v[j];
        sv_n = p.sigma * values.v_n;
    }
    std::vector<double> cont(J);
    double cont_n;
    detail::scaled_continuation(p, sv, sv_n, cont, cont_n);
    FlowUtility out;
    out.u.resize(J);
    for (int j = 0; j < J; ++j) {
        double su = sv[j] - p.beta * cont[j];
        out.u[j] = values.scaled ? su : su / p.sigma;
    }
    return out;
}

// Model-implied one-period transition flows. The EE matrix keeps the
// relocation and voluntary parts separate; diagonals are zero since a
// draw of the own employer is a stay, not a move.
struct ExpectedFlows {
    int J = 0;
    std::vector<double> ee_reloc;  // row-major J x J
    std::vector<double> ee_vol;    // row-major J x J
    std::vector<double> en;        // M_jN
    std::vector<double> ne;        // M_Nj

    double ee(int j, int k) const { return ee_reloc[j * J + k] + ee_vol[j * J + k]; }
};

inline ExpectedFlows expected_flows(const EconomyParams& p, const ValueVector& values,
                                    const std::vector<double>& L, double L_N) {
    p.validate();
    require(!values.scaled, "expected_flows: values must be in preference space");
    require(static_cast<int>(values.size()) == p.J, "expected_flows: value length mismatch");
    require(static_cast<int>(L.size()) == p.J, "expected_flows: employment mass length mismatch");
    for (double l : L) require(l >= 0.0, "expected_flows: negative employment mass");
    require(L_N >= 0.0, "expected_flows: negative non-employment mass");

    const int J = p.J;
    std::vector<double> sv(J);
    for (int j = 0; j < J; ++j) sv[j] = p.sigma * values.v[j];
    const double sv_n = p.sigma * values.v_n;

    ExpectedFlows out;
    out.J = J;
    out.ee_reloc.assign(static_cast<size_t>(J) * J, 0.0);
    out.ee_vol.assign(static_cast<size_t>(J) * J, 0.0);
    out.en.assign(J, 0.0);
    out.ne.assign(J, 0.0);

    for (int j = 0; j < J; ++j) {
        double sj = p.s(j);
        for (int k = 0; k < J; ++k) {
            if (k == j) continue;
            out.ee_reloc[j * J + k] = L[j] * p.rho[j] * p.f[k];
            out.ee_vol[j * J + k] =
                L[j] * sj * p.lambda1 * p.f[k] * acceptance_prob_scaled(sv[j], sv[k]);
        }
        out.en[j] = L[j] * p.delta[j] +
                    L[j] * sj * (1.0 - p.lambda1) * acceptance_prob_scaled(sv[j], sv_n);
    }
    for (int k = 0; k < J; ++k)
        out.ne[k] = L_N * p.lambda0 * p.f[k] * acceptance_prob_scaled(sv_n, sv[k]);
    return out;
}

}  // namespace jobval
