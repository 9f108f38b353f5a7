#pragma once

#include <deque>
#include <vector>

namespace mrflp {

/// Boykov-Kolmogorov augmenting-path max-flow with search-tree reuse.
///
/// Terminal capacities are folded into a single signed residual per node
/// (positive: from source, negative: to sink).
class MaxFlowGraph {
public:
    explicit MaxFlowGraph(int node_count);

    /// Capacities must be nonnegative.
    void add_edge(int u, int v, double cap_uv, double cap_vu);
    void add_terminal(int u, double cap_from_source, double cap_to_sink);

    /// Runs to completion and returns the flow value. Call once.
    double solve();

    /// True when `u` ends on the source side of the minimum cut.
    bool source_side(int u) const;

    /// Capacity of the cut given by `source_side`, from the original capacities.
    double cut_value() const;

    int node_count() const noexcept { return static_cast<int>(nodes_.size()); }

private:
    static constexpr int kNone = -1;
    static constexpr int kTerminal = -2;
    static constexpr int kOrphan = -3;

    struct Node {
        int first = -1;
        int parent = kNone;
        int ts = 0;
        int dist = 0;
        bool is_sink = false;
        bool active = false;
        double tr_cap = 0.0;
    };
    struct Arc {
        int head;
        int next;
        int sister;
        double r_cap;
        double cap;
    };

    void set_active(int i);
    int next_active();
    void augment(int middle);
    void adopt_source_orphan(int i);
    void adopt_sink_orphan(int i);

    std::vector<Node> nodes_;
    std::vector<Arc> arcs_;
    std::vector<double> source_cap_;
    std::vector<double> sink_cap_;
    std::deque<int> active_;
    std::deque<int> orphans_;
    double flow_ = 0.0;
    int time_ = 0;
    bool solved_ = false;
};

}  // namespace mrflp
