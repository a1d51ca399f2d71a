#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "jobval/common.hpp"
#include "jobval/model.hpp"
#include "jobval/panel.hpp"

namespace jobval {

// Per-period-averaged transition counts between employers and to/from
// non-employment. Nodes are dense indices 0..J-1; employer_ids maps
// back to the original establishment ids. The ee diagonal is zero by
// construction (self-moves excluded).
struct FlowMatrices {
    int J = 0;
    std::vector<int> employer_ids;           // node -> original id
    std::vector<std::map<int, double>> ee;   // sparse rows, ordered by column
    std::vector<double> en;                  // M_jN
    std::vector<double> ne;                  // M_Nj
    std::vector<double> L;                   // mean employment mass per period
    double L_N = 0.0;
    int n_periods = 0;

    double ee_at(int j, int k) const {
        auto it = ee[j].find(k);
        return it == ee[j].end() ? 0.0 : it->second;
    }

    double total_ee() const {
        double s = 0.0;
        for (const auto& row : ee)
            for (const auto& [k, v] : row) s += v;
        return s;
    }

    // Restriction to a node subset (indices into the current object).
    // Flows between kept employers are retained; en/ne/L are carried
    // over unchanged for kept nodes.
    FlowMatrices restrict_to(const std::vector<int>& nodes) const {
        FlowMatrices out;
        out.J = static_cast<int>(nodes.size());
        out.n_periods = n_periods;
        out.L_N = L_N;
        out.employer_ids.resize(nodes.size());
        out.en.resize(nodes.size());
        out.ne.resize(nodes.size());
        out.L.resize(nodes.size());
        out.ee.resize(nodes.size());
        std::unordered_map<int, int> pos;
        pos.reserve(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = static_cast<int>(i);
        for (size_t i = 0; i < nodes.size(); ++i) {
            int j = nodes[i];
            out.employer_ids[i] = employer_ids[j];
            out.en[i] = en[j];
            out.ne[i] = ne[j];
            out.L[i] = L[j];
            for (const auto& [k, v] : ee[j]) {
                auto it = pos.find(k);
                if (it != pos.end()) out.ee[i][it->second] = v;
            }
        }
        return out;
    }
};

// Builds flow matrices from a worker panel. Consecutive employment
// spells with a day gap of at most gap_days and different employers
// count as EE moves; larger gaps route through EN/NE. Counts are
// averaged over the transition windows (periods minus one) and L over
// the origin periods, which keeps empirical flows comparable with the
// model's per-period flow measures.
inline FlowMatrices build_flows(const std::vector<PanelRecord>& panel, int gap_days = 31) {
    require(gap_days >= 0, "build_flows: gap_days must be non-negative");
    if (panel.empty()) throw DataError("build_flows: empty panel");

    // Dense employer index.
    std::set<int> id_set;
    int min_p = panel.front().period, max_p = panel.front().period;
    for (const auto& r : panel) {
        if (r.employed()) id_set.insert(r.employer_id);
        min_p = std::min(min_p, r.period);
        max_p = std::max(max_p, r.period);
    }
    FlowMatrices out;
    out.employer_ids.assign(id_set.begin(), id_set.end());
    out.J = static_cast<int>(out.employer_ids.size());
    out.n_periods = max_p - min_p + 1;
    std::unordered_map<int, int> node_of;
    node_of.reserve(out.employer_ids.size());
    for (int j = 0; j < out.J; ++j) node_of[out.employer_ids[j]] = j;

    // Group record indices by worker, ordered by period.
    std::vector<size_t> order(panel.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (panel[a].worker_id != panel[b].worker_id)
            return panel[a].worker_id < panel[b].worker_id;
        return panel[a].period < panel[b].period;
    });

    std::set<int64_t> overlapping;
    out.ee.assign(out.J, {});
    out.en.assign(out.J, 0.0);
    out.ne.assign(out.J, 0.0);
    out.L.assign(out.J, 0.0);

    const int windows = std::max(1, out.n_periods - 1);
    auto count_mass = [&](const PanelRecord& r) {
        // Origin-period masses only, so that L matches the base of the
        // per-window transition counts.
        if (out.n_periods > 1 && r.period == max_p) return;
        if (r.employed())
            out.L[node_of[r.employer_id]] += 1.0;
        else
            out.L_N += 1.0;
    };

    for (size_t i = 0; i < order.size();) {
        size_t begin = i;
        int64_t wid = panel[order[i]].worker_id;
        while (i < order.size() && panel[order[i]].worker_id == wid) ++i;

        const PanelRecord* prev = nullptr;
        for (size_t q = begin; q < i; ++q) {
            const PanelRecord& cur = panel[order[q]];
            require(cur.spell_start_day >= 1 && cur.spell_end_day <= kDaysPerPeriod &&
                        cur.spell_start_day <= cur.spell_end_day,
                    "build_flows: spell days out of range");
            count_mass(cur);
            if (prev != nullptr) {
                if (prev->period == cur.period) {
                    overlapping.insert(wid);
                } else {
                    int gap = (kDaysPerPeriod - prev->spell_end_day) +
                              kDaysPerPeriod * (cur.period - prev->period - 1) +
                              (cur.spell_start_day - 1);
                    if (prev->employed() && cur.employed()) {
                        if (prev->employer_id != cur.employer_id && gap <= gap_days) {
                            out.ee[node_of[prev->employer_id]][node_of[cur.employer_id]] += 1.0;
                        } else if (gap > gap_days) {
                            out.en[node_of[prev->employer_id]] += 1.0;
                            out.ne[node_of[cur.employer_id]] += 1.0;
                        }
                    } else if (prev->employed() && !cur.employed()) {
                        out.en[node_of[prev->employer_id]] += 1.0;
                    } else if (!prev->employed() && cur.employed()) {
                        out.ne[node_of[cur.employer_id]] += 1.0;
                    }
                }
            }
            prev = &cur;
        }
    }
    if (!overlapping.empty()) {
        std::string msg = "build_flows: overlapping spells for workers:";
        int shown = 0;
        for (int64_t w : overlapping) {
            msg += " " + std::to_string(w);
            if (++shown >= 20) {
                msg += " ...";
                break;
            }
        }
        throw DataError(msg);
    }

    const double inv_w = 1.0 / static_cast<double>(windows);
    for (auto& row : out.ee)
        for (auto& [k, v] : row) v *= inv_w;
    for (auto& x : out.en) x *= inv_w;
    for (auto& x : out.ne) x *= inv_w;
    const double denom =
        out.n_periods > 1 ? static_cast<double>(out.n_periods - 1) : 1.0;
    for (auto& x : out.L) x /= denom;
    out.L_N /= denom;
    return out;
}

// Tarjan's algorithm, iterative to keep stack depth flat. Two employers
// share a component iff each reaches the other through positive-count
// edges.
inline std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::map<int, double>>& ee) {
    const int n = static_cast<int>(ee.size());
    std::vector<std::vector<int>> adj(n);
    for (int j = 0; j < n; ++j)
        for (const auto& [k, v] : ee[j])
            if (v > 0.0 && k != j) adj[j].push_back(k);

    std::vector<int> index(n, -1), lowlink(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int next_index = 0;

    struct Frame {
        int v;
        size_t child;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            Frame& f = call.back();
            int v = f.v;
            if (f.child == 0) {
                index[v] = lowlink[v] = next_index++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            bool descended = false;
            while (f.child < adj[v].size()) {
                int w = adj[v][f.child++];
                if (index[w] == -1) {
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
            }
            if (descended) continue;
            if (lowlink[v] == index[v]) {
                std::vector<int> comp;
                for (;;) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                    if (w == v) break;
                }
                std::sort(comp.begin(), comp.end());
                comps.push_back(std::move(comp));
            }
            call.pop_back();
            if (!call.empty()) {
                int parent = call.back().v;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }
    return comps;
}

inline std::vector<std::vector<int>> strongly_connected_components(const FlowMatrices& flows) {
    return strongly_connected_components(flows.ee);
}

// Fixed point of: restrict to the largest SCC, drop employers hiring
// nobody from non-employment, repeat. "Largest" is by worker-year mass,
// ties broken by member count then lowest node id. Returns node indices
// into `flows`, sorted.
inline std::vector<int> estimation_set(const FlowMatrices& flows) {
    std::vector<int> active(flows.J);
    for (int j = 0; j < flows.J; ++j) active[j] = j;

    std::string trace;
    for (int round = 1;; ++round) {
        FlowMatrices sub = flows.restrict_to(active);
        auto comps = strongly_connected_components(sub);
        if (comps.empty())
            throw DataError("estimation_set: empty graph; trace:" + trace);
        size_t best = 0;
        double best_mass = -1.0;
        for (size_t c = 0; c < comps.size(); ++c) {
            double mass = 0.0;
            for (int j : comps[c]) mass += sub.L[j];
            bool better = mass > best_mass;
            if (!better && mass == best_mass) {
                if (comps[c].size() != comps[best].size())
                    better = comps[c].size() > comps[best].size();
                else
                    better = comps[c].front() < comps[best].front();
            }
            if (better) {
                best = c;
                best_mass = mass;
            }
        }
        std::vector<int> next;
        for (int j : comps[best])
            if (sub.ne[j] > 0.0) next.push_back(active[j]);
        trace += " round " + std::to_string(round) + ": scc=" +
                 std::to_string(comps[best].size()) + " after-hiring=" +
                 std::to_string(next.size()) + ";";
        if (next.empty())
            throw DataError("estimation_set: fixed point is empty; trace:" + trace);
        if (next.size() == active.size()) return next;
        active = std::move(next);
    }
}

// Pre-SCC stability filter: employers observed in at least min_periods
// periods with at least min_workers non-singleton workers on average.
// A non-singleton worker is one observed again at some later point in
// the sample. Returns original employer ids.
inline std::vector<int> stable_employers(const std::vector<PanelRecord>& panel,
                                         int min_periods = 2, double min_workers = 5.0) {
    std::unordered_map<int64_t, int> last_period;
    for (const auto& r : panel) {
        auto [it, inserted] = last_period.try_emplace(r.worker_id, r.period);
        if (!inserted) it->second = std::max(it->second, r.period);
    }
    std::map<int, std::map<int, int>> per_employer_period;  // employer -> period -> count
    for (const auto& r : panel) {
        if (!r.employed()) continue;
        if (last_period[r.worker_id] > r.period)
            per_employer_period[r.employer_id][r.period] += 1;
    }
    std::vector<int> keep;
    for (const auto& [emp, periods] : per_employer_period) {
        if (static_cast<int>(periods.size()) < min_periods) continue;
        double total = 0.0;
        for (const auto& [p, c] : periods) total += c;
        if (total / static_cast<double>(periods.size()) >= min_workers) keep.push_back(emp);
    }
    return keep;
}

// Expected model flows reshaped as data-side flow matrices, for feeding
// the estimators with exact expectations.
inline FlowMatrices to_flow_matrices(const ExpectedFlows& flows, const std::vector<double>& L,
                                     double L_N) {
    FlowMatrices out;
    out.J = flows.J;
    out.n_periods = 0;
    out.employer_ids.resize(flows.J);
    for (int j = 0; j < flows.J; ++j) out.employer_ids[j] = j;
    out.ee.assign(flows.J, {});
    for (int j = 0; j < flows.J; ++j)
        for (int k = 0; k < flows.J; ++k) {
            double v = flows.ee(j, k);
            if (v > 0.0) out.ee[j][k] = v;
        }
    out.en = flows.en;
    out.ne = flows.ne;
    out.L = L;
    out.L_N = L_N;
    return out;
}

}  // namespace jobval
