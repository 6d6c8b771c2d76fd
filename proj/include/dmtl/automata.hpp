#pragma once

#include "dmtl/store.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

namespace dmtl {

struct ReductionOutput {
    Program program;
    std::vector<Fact> dataset;
    std::string fresh_predicate;
};

// Builds (Π′, D′) such that Π, D entail the query iff Π′, D′ is inconsistent.
// Throws std::invalid_argument for an empty or doubly unbounded query interval.
ReductionOutput entail_to_inconsist(const Program& p, const std::vector<Fact>& d, const Fact& query);

// The gcd-spaced ruler. Ruler intervals carry half-unit indices: index k is the point k·d/2
// when k is even and the open segment ((k−1)·d/2, (k+1)·d/2) when k is odd.
struct RulerGrid {
    Rational d{1};
    Rational x{0};
    Rational z{0};
    Interval span;

    static RulerGrid of(const Program& p, const std::vector<Fact>& d);
    Interval ruler_interval(long k) const;
    // Index of the ruler point at t; t must be a multiple of d.
    long index_of(const Rational& t) const;
};

// ⊤, every literal of every grounding of Π over the constants of Π and D, and the four unbounded
// boxes over each atom of D. Sorted.
std::vector<MetricAtom> literal_universe(const Program& p, const std::vector<Fact>& d);

enum class Direction { Left, Right };

// Consecutive ruler intervals starting at index `first`, each labelled with the literals holding there.
// ⊤ is implicit and never listed.
struct Window {
    long first = 0;
    std::vector<std::set<MetricAtom>> labels;
};

struct AutomataOptions {
    // Fix unbounded boxes and diamonds from the label two positions back instead of guessing them.
    bool monotone_pruning = true;
    // Also label the unbounded boxes over dataset atoms. They never occur in rules, so they
    // cannot change the decision; they are off by default to keep states small.
    bool track_dataset_boxes = false;
    std::size_t max_states = 0;  // 0 means unlimited
    std::stop_token stop;
    std::ostream* trace = nullptr;
    bool record_graph = false;
};

struct AutomataStats {
    std::size_t span_expansions = 0;
    std::size_t buchi_states = 0;
    std::size_t letters = 0;
    std::size_t tracked_literals = 0;
    std::size_t ground_rules = 0;
    std::size_t window_size = 0;
    long span_index = 0;  // the scan covers ruler indices [−span_index, span_index]
    bool short_circuit = false;
    bool bottom_in_span = false;
    std::string dot;  // explored state graph, when record_graph is set
};

struct AutomataLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct AutomataCancelled : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The automaton of one instance. `lower` is an optional set of facts known to hold in every model
// (for example a span-clipped materialisation); it is installed as mandatory content.
class ConsistencyChecker {
public:
    ConsistencyChecker(const Program& p, const std::vector<Fact>& d, AutomataOptions opts = {},
                       const FactStore* lower = nullptr);
    ~ConsistencyChecker();
    ConsistencyChecker(const ConsistencyChecker&) = delete;
    ConsistencyChecker& operator=(const ConsistencyChecker&) = delete;

    const RulerGrid& grid() const;
    long span_index() const;
    std::size_t window_size() const;
    const std::vector<MetricAtom>& tracked() const;

    // Facts installed, labels exact wherever their support lies inside the window, rules satisfied.
    bool check_satisfiability(const Window& w) const;
    // Labels the whole span [−span_index, span_index]. With directional checks the result also
    // extends to a model in both infinite directions.
    std::optional<Window> search_window(bool directional = true);
    // Whether the window (of exactly window_size() labels) extends to an accepting infinite run.
    bool has_accepting_run(Direction dir, const Window& w0);
    // Existence of a model.
    bool decide();

    const AutomataStats& stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Whether Π and D have a model.
bool consistent(const Program& p, const std::vector<Fact>& d, const AutomataOptions& opts = {},
                AutomataStats* stats = nullptr);

}  // namespace dmtl
