#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jobval/common.hpp"

namespace jobval {

// Full primitive vector of the job-ladder economy. Employers are
// indexed 0..J-1; probabilities are per period (one year).
struct EconomyParams {
    int J = 0;
    std::vector<double> psi;    // log pay premium per employer
    std::vector<double> a;      // amenity value per employer (utils)
    std::vector<double> delta;  // job destruction probability
    std::vector<double> rho;    // forced relocation probability
    std::vector<double> f;      // offer distribution, sums to 1
    double lambda0 = 0.0;       // offer arrival when non-employed
    double lambda1 = 0.0;       // offer arrival when employed
    double beta = 1.0 / 1.05;   // discount factor, 5% annual rate
    double sigma = 1.0;         // inverse scale of Gumbel taste shocks
    double u_N = 0.0;           // flow utility of non-employment

    void validate() const {
        require(J >= 1, "EconomyParams: J must be positive");
        auto check_len = [&](const std::vector<double>& v, const char* name) {
            require(static_cast<int>(v.size()) == J,
                    std::string("EconomyParams: ") + name + " has wrong length");
        };
        check_len(psi, "psi");
        check_len(a, "a");
        check_len(delta, "delta");
        check_len(rho, "rho");
        check_len(f, "f");
        double fsum = 0.0;
        for (int j = 0; j < J; ++j) {
            require(std::isfinite(psi[j]) && std::isfinite(a[j]),
                    "EconomyParams: non-finite psi/a");
            require(delta[j] >= 0.0 && delta[j] < 1.0, "EconomyParams: delta out of [0,1)");
            require(rho[j] >= 0.0 && rho[j] < 1.0, "EconomyParams: rho out of [0,1)");
            require(delta[j] + rho[j] < 1.0, "EconomyParams: delta + rho must stay below 1");
            require(f[j] >= 0.0, "EconomyParams: negative offer weight");
            fsum += f[j];
        }
        require(std::abs(fsum - 1.0) <= 1e-12, "EconomyParams: f must sum to 1");
        require(lambda0 >= 0.0 && lambda0 <= 1.0, "EconomyParams: lambda0 out of [0,1]");
        require(lambda1 >= 0.0 && lambda1 <= 1.0, "EconomyParams: lambda1 out of [0,1]");
        require(beta > 0.0 && beta < 1.0, "EconomyParams: beta must lie in (0,1)");
        require(sigma > 0.0 && std::isfinite(sigma), "EconomyParams: sigma must be positive");
        require(std::isfinite(u_N), "EconomyParams: u_N must be finite");
    }

    // Survival probability 1 - delta_j - rho_j.
    double s(int j) const { return 1.0 - delta[j] - rho[j]; }
};

// Employer values plus the non-employment value. `scaled` records
// whether entries are sigma*V (estimation space) or V (preference
// space); it is set at construction and never flipped in place.
struct ValueVector {
    std::vector<double> v;
    double v_n = 0.0;
    bool scaled = false;

    ValueVector() = default;
    ValueVector(std::vector<double> values, double value_n, bool is_scaled)
        : v(std::move(values)), v_n(value_n), scaled(is_scaled) {
        for (double x : v) require(std::isfinite(x), "ValueVector: non-finite entry");
        require(std::isfinite(v_n), "ValueVector: non-finite v_n");
    }

    size_t size() const { return v.size(); }
};

// Flow utilities u_j = psi_j + a_j.
struct FlowUtility {
    std::vector<double> u;

    static FlowUtility from_components(const std::vector<double>& psi,
                                       const std::vector<double>& a) {
        require(psi.size() == a.size(), "FlowUtility: psi/a size mismatch");
        FlowUtility out;
        out.u.resize(psi.size());
        for (size_t j = 0; j < psi.size(); ++j) out.u[j] = psi[j] + a[j];
        return out;
    }

    // Recovers a_j = u_j - psi_j; bitwise inverse of from_components.
    std::vector<double> amenities(const std::vector<double>& psi) const {
        require(psi.size() == u.size(), "FlowUtility: psi size mismatch");
        std::vector<double> a(u.size());
        for (size_t j = 0; j < u.size(); ++j) a[j] = u[j] - psi[j];
        return a;
    }
};

}  // namespace jobval
