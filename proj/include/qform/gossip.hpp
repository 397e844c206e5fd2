#pragma once

#include "qform/quantizer.hpp"
#include "qform/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace qform::gossip {

// One integer state per agent. Radial and angular channels are two
// independent instances of this vector.
using IntState = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct Graph {
    int n = 0;                                // agent count
    std::vector<std::pair<int, int>> edges;   // undirected, 0-based, i < j

    static Graph chain(int n);
    void validate() const;   // throws: self-loop, out of range, disconnected
    bool is_chain() const;   // exactly the path 0-1-...-(n-1)
};

// Pair update for one selected edge: each endpoint moves toward the other by
// round(omega * difference). With the ties-away-from-zero rule the two
// corrections cancel exactly, so the sum is conserved.
inline std::pair<std::int64_t, std::int64_t> step_values(std::int64_t zi, std::int64_t zj, double omega) {
    const double d = static_cast<double>(zj - zi);
    return {zi + round_half_away(omega * d), zj + round_half_away(-omega * d)};
}

inline void step(IntState& z, int i, int j, double omega) {
    if (i == j || i < 0 || j < 0 || i >= z.size() || j >= z.size())
        throw std::invalid_argument("gossip::step: invalid agent pair");
    const auto [zi, zj] = step_values(z[i], z[j], omega);
    z[i] = zi;
    z[j] = zj;
}

// Equilibrium set: spread at most one, i.e. every entry in {L, L+1}.
inline bool is_equilibrium(const IntState& z) {
    return z.maxCoeff() - z.minCoeff() <= 1;
}

std::pair<int, int> select_edge(const Graph& g, Rng& rng);

// Traces store the initial state plus the two touched values per step, which
// stays compact for long runs; full states are reconstructed on demand.
struct StepEvent {
    int i, j;
    std::int64_t zi, zj;  // values after the step
};

struct Run {
    IntState z0;
    std::vector<StepEvent> events;
    std::optional<std::int64_t> t_con;  // first step index in the equilibrium set
    IntState final;

    std::int64_t steps() const { return static_cast<std::int64_t>(events.size()); }

    // visitor(step_index, state) for step 0 .. steps()
    template <class F>
    void replay(F&& visitor) const {
        IntState z = z0;
        visitor(std::int64_t{0}, static_cast<const IntState&>(z));
        for (std::size_t t = 0; t < events.size(); ++t) {
            z[events[t].i] = events[t].zi;
            z[events[t].j] = events[t].zj;
            visitor(static_cast<std::int64_t>(t + 1), static_cast<const IntState&>(z));
        }
    }

    std::vector<IntState> states() const;
};

struct RunOptions {
    std::int64_t max_steps = 1'000'000;
    bool stop_on_converge = true;
};

Run run(const IntState& z0, const Graph& g, double omega, Rng& rng, const RunOptions& opts);

// CSV rows: step,i,j,z_1,...,z_N (i, j are 1-based; -1 on the initial row).
void write_trace_csv(std::ostream& out, const Run& run);

}  // namespace qform::gossip
