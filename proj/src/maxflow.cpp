#include "mrflp/maxflow.hpp"

#include <algorithm>
#include <limits>

#include "mrflp/errors.hpp"

namespace mrflp {

MaxFlowGraph::MaxFlowGraph(int node_count)
    : nodes_(node_count), source_cap_(node_count, 0.0), sink_cap_(node_count, 0.0)
{
}

void MaxFlowGraph::add_edge(int u, int v, double cap_uv, double cap_vu)
{
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count() || u == v) {
        throw InvalidInputError("maxflow: invalid edge endpoints");
    }
    if (cap_uv < 0.0 || cap_vu < 0.0) {
        throw InvalidInputError("maxflow: negative capacity");
    }
    const int a = static_cast<int>(arcs_.size());
    arcs_.push_back({v, nodes_[u].first, a + 1, cap_uv, cap_uv});
    nodes_[u].first = a;
    arcs_.push_back({u, nodes_[v].first, a, cap_vu, cap_vu});
    nodes_[v].first = a + 1;
}

void MaxFlowGraph::add_terminal(int u, double cap_from_source, double cap_to_sink)
{
    if (cap_from_source < 0.0 || cap_to_sink < 0.0) {
        throw InvalidInputError("maxflow: negative terminal capacity");
    }
    source_cap_.at(u) += cap_from_source;
    sink_cap_.at(u) += cap_to_sink;
}

void MaxFlowGraph::set_active(int i)
{
    if (!nodes_[i].active) {
        nodes_[i].active = true;
        active_.push_back(i);
    }
}

int MaxFlowGraph::next_active()
{
    while (!active_.empty()) {
        const int i = active_.front();
        active_.pop_front();
        nodes_[i].active = false;
        if (nodes_[i].parent != kNone) {
            return i;
        }
    }
    return -1;
}

void MaxFlowGraph::augment(int middle)
{
    double bottleneck = arcs_[middle].r_cap;
    int i = arcs_[arcs_[middle].sister].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            break;
        }
        bottleneck = std::min(bottleneck, arcs_[arcs_[a].sister].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, nodes_[i].tr_cap);
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            break;
        }
        bottleneck = std::min(bottleneck, arcs_[a].r_cap);
        i = arcs_[a].head;
    }
    bottleneck = std::min(bottleneck, -nodes_[i].tr_cap);

    auto make_orphan = [&](int v) {
        nodes_[v].parent = kOrphan;
        orphans_.push_front(v);
    };

    arcs_[arcs_[middle].sister].r_cap += bottleneck;
    arcs_[middle].r_cap -= bottleneck;
    i = arcs_[arcs_[middle].sister].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            break;
        }
        arcs_[a].r_cap += bottleneck;
        arcs_[arcs_[a].sister].r_cap -= bottleneck;
        if (!(arcs_[arcs_[a].sister].r_cap > 0.0)) {
            make_orphan(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap -= bottleneck;
    if (!(nodes_[i].tr_cap > 0.0)) {
        make_orphan(i);
    }
    i = arcs_[middle].head;
    for (;;) {
        const int a = nodes_[i].parent;
        if (a == kTerminal) {
            break;
        }
        arcs_[arcs_[a].sister].r_cap += bottleneck;
        arcs_[a].r_cap -= bottleneck;
        if (!(arcs_[a].r_cap > 0.0)) {
            make_orphan(i);
        }
        i = arcs_[a].head;
    }
    nodes_[i].tr_cap += bottleneck;
    if (!(nodes_[i].tr_cap < 0.0)) {
        make_orphan(i);
    }
    flow_ += bottleneck;
}

void MaxFlowGraph::adopt_source_orphan(int i)
{
    constexpr int kInfDist = std::numeric_limits<int>::max();
    int best_arc = kNone;
    int best_dist = kInfDist;
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        if (!(arcs_[arcs_[a0].sister].r_cap > 0.0)) {
            continue;
        }
        int j = arcs_[a0].head;
        if (nodes_[j].is_sink || nodes_[j].parent == kNone) {
            continue;
        }
        // Walk to the root to check that j still hangs off the source.
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfDist;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best_arc;
    if (best_arc != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = best_dist + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (nodes_[j].is_sink || a == kNone) {
            continue;
        }
        if (arcs_[arcs_[a0].sister].r_cap > 0.0) {
            set_active(j);
        }
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

void MaxFlowGraph::adopt_sink_orphan(int i)
{
    constexpr int kInfDist = std::numeric_limits<int>::max();
    int best_arc = kNone;
    int best_dist = kInfDist;
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        if (!(arcs_[a0].r_cap > 0.0)) {
            continue;
        }
        int j = arcs_[a0].head;
        if (!nodes_[j].is_sink || nodes_[j].parent == kNone) {
            continue;
        }
        int d = 0;
        for (;;) {
            if (nodes_[j].ts == time_) {
                d += nodes_[j].dist;
                break;
            }
            const int a = nodes_[j].parent;
            ++d;
            if (a == kTerminal) {
                nodes_[j].ts = time_;
                nodes_[j].dist = 1;
                break;
            }
            if (a == kOrphan) {
                d = kInfDist;
                break;
            }
            j = arcs_[a].head;
        }
        if (d < kInfDist) {
            if (d < best_dist) {
                best_arc = a0;
                best_dist = d;
            }
            for (j = arcs_[a0].head; nodes_[j].ts != time_; j = arcs_[nodes_[j].parent].head) {
                nodes_[j].ts = time_;
                nodes_[j].dist = d--;
            }
        }
    }
    nodes_[i].parent = best_arc;
    if (best_arc != kNone) {
        nodes_[i].ts = time_;
        nodes_[i].dist = best_dist + 1;
        return;
    }
    for (int a0 = nodes_[i].first; a0 != -1; a0 = arcs_[a0].next) {
        const int j = arcs_[a0].head;
        const int a = nodes_[j].parent;
        if (!nodes_[j].is_sink || a == kNone) {
            continue;
        }
        if (arcs_[a0].r_cap > 0.0) {
            set_active(j);
        }
        if (a != kTerminal && a != kOrphan && arcs_[a].head == i) {
            nodes_[j].parent = kOrphan;
            orphans_.push_back(j);
        }
    }
}

double MaxFlowGraph::solve()
{
    if (solved_) {
        throw SolverError("maxflow: solve may only be called once");
    }
    solved_ = true;
    const int n = node_count();
    for (int i = 0; i < n; ++i) {
        // Flow through s -> i -> t is pushed immediately.
        const double direct = std::min(source_cap_[i], sink_cap_[i]);
        flow_ += direct;
        nodes_[i].tr_cap = source_cap_[i] - sink_cap_[i];
        if (nodes_[i].tr_cap > 0.0) {
            nodes_[i].is_sink = false;
            nodes_[i].parent = kTerminal;
            nodes_[i].dist = 1;
            set_active(i);
        } else if (nodes_[i].tr_cap < 0.0) {
            nodes_[i].is_sink = true;
            nodes_[i].parent = kTerminal;
            nodes_[i].dist = 1;
            set_active(i);
        }
    }

    int current = -1;
    for (;;) {
        int i = current;
        if (i != -1) {
            nodes_[i].active = false;
            if (nodes_[i].parent == kNone) {
                i = -1;
            }
        }
        if (i == -1) {
            i = next_active();
            if (i == -1) {
                break;
            }
        }

        int path_arc = -1;
        if (!nodes_[i].is_sink) {
            for (int a = nodes_[i].first; a != -1; a = arcs_[a].next) {
                if (!(arcs_[a].r_cap > 0.0)) {
                    continue;
                }
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = false;
                    nodes_[j].parent = arcs_[a].sister;
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (nodes_[j].is_sink) {
                    path_arc = a;
                    break;
                } else if (nodes_[j].ts <= nodes_[i].ts && nodes_[j].dist > nodes_[i].dist) {
                    nodes_[j].parent = arcs_[a].sister;
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                }
            }
        } else {
            for (int a = nodes_[i].first; a != -1; a = arcs_[a].next) {
                if (!(arcs_[arcs_[a].sister].r_cap > 0.0)) {
                    continue;
                }
                const int j = arcs_[a].head;
                if (nodes_[j].parent == kNone) {
                    nodes_[j].is_sink = true;
                    nodes_[j].parent = arcs_[a].sister;
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                    set_active(j);
                } else if (!nodes_[j].is_sink) {
                    path_arc = arcs_[a].sister;
                    break;
                } else if (nodes_[j].ts <= nodes_[i].ts && nodes_[j].dist > nodes_[i].dist) {
                    nodes_[j].parent = arcs_[a].sister;
                    nodes_[j].ts = nodes_[i].ts;
                    nodes_[j].dist = nodes_[i].dist + 1;
                }
            }
        }

        ++time_;
        if (path_arc == -1) {
            current = -1;
            continue;
        }
        nodes_[i].active = true;  // keeps i out of the queue while it is current
        current = i;
        augment(path_arc);
        while (!orphans_.empty()) {
            const int o = orphans_.front();
            orphans_.pop_front();
            if (nodes_[o].is_sink) {
                adopt_sink_orphan(o);
            } else {
                adopt_source_orphan(o);
            }
        }
    }
    return flow_;
}

bool MaxFlowGraph::source_side(int u) const
{
    return nodes_.at(u).parent != kNone && !nodes_[u].is_sink;
}

double MaxFlowGraph::cut_value() const
{
    double cut = 0.0;
    for (int u = 0; u < node_count(); ++u) {
        const bool su = source_side(u);
        cut += su ? sink_cap_[u] : source_cap_[u];
        if (!su) {
            continue;
        }
        for (int a = nodes_[u].first; a != -1; a = arcs_[a].next) {
            if (!source_side(arcs_[a].head)) {
                cut += arcs_[a].cap;
            }
        }
    }
    return cut;
}

}  // namespace mrflp
