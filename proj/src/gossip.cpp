#include "qform/gossip.hpp"

#include <algorithm>

namespace qform::gossip {

Graph Graph::chain(int n) {
    Graph g;
    g.n = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
    g.validate();
    return g;
}

void Graph::validate() const {
    if (n < 1) throw std::invalid_argument("graph: need at least one agent");
    if (n > 1 && edges.empty()) throw std::invalid_argument("graph: no edges");
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : edges) {
        if (i == j) throw std::invalid_argument("graph: self-loop");
        if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("graph: edge index out of range");
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    // connectivity by BFS from node 0
    std::vector<char> seen(n, 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        const int v = queue.back();
        queue.pop_back();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
            }
    }
    if (std::count(seen.begin(), seen.end(), char{1}) != n)
        throw std::invalid_argument("graph: not connected");
}

bool Graph::is_chain() const {
    if (static_cast<int>(edges.size()) != n - 1) return false;
    std::vector<std::pair<int, int>> sorted = edges;
    for (auto& e : sorted)
        if (e.first > e.second) std::swap(e.first, e.second);
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i + 1 < n; ++i)
        if (sorted[i] != std::pair<int, int>{i, i + 1}) return false;
    return true;
}

std::pair<int, int> select_edge(const Graph& g, Rng& rng) {
    const auto& e = g.edges[rng.below(g.edges.size())];
    return e;
}

std::vector<IntState> Run::states() const {
    std::vector<IntState> out;
    out.reserve(events.size() + 1);
    replay([&](std::int64_t, const IntState& z) { out.push_back(z); });
    return out;
}

Run run(const IntState& z0, const Graph& g, double omega, Rng& rng, const RunOptions& opts) {
    if (opts.max_steps <= 0) throw std::invalid_argument("gossip::run: max_steps must be positive");
    if (z0.size() != g.n) throw std::invalid_argument("gossip::run: state size does not match graph");

    Run result;
    result.z0 = z0;
    IntState z = z0;
    if (is_equilibrium(z)) result.t_con = 0;

    for (std::int64_t t = 1; t <= opts.max_steps && !g.edges.empty(); ++t) {
        if (result.t_con && opts.stop_on_converge) break;
        const auto [i, j] = select_edge(g, rng);
        step(z, i, j, omega);
        result.events.push_back({i, j, z[i], z[j]});
        if (!result.t_con && is_equilibrium(z)) result.t_con = t;
    }
    result.final = std::move(z);
    return result;
}

void write_trace_csv(std::ostream& out, const Run& run) {
    out << "step,i,j";
    for (Eigen::Index k = 0; k < run.z0.size(); ++k) out << ",z_" << (k + 1);
    out << "\n";
    run.replay([&](std::int64_t t, const IntState& z) {
        if (t == 0) {
            out << "0,-1,-1";
        } else {
            const StepEvent& e = run.events[static_cast<std::size_t>(t - 1)];
            out << t << ',' << (e.i + 1) << ',' << (e.j + 1);
        }
        for (Eigen::Index k = 0; k < z.size(); ++k) out << ',' << z[k];
        out << '\n';
    });
}

}  // namespace qform::gossip
