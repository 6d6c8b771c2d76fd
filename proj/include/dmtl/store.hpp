#pragma once

#include "dmtl/syntax.hpp"

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace dmtl {

struct AtomHash {
    std::size_t operator()(const RelationalAtom& a) const;
};

// Coalesced fact store. Interval lists are shared copy-on-write so copies are cheap snapshots.
class FactStore {
public:
    FactStore() = default;
    explicit FactStore(const std::vector<Fact>& facts);

    // Returns true iff the covered point set of the atom strictly grew.
    bool insert(const Fact& f) { return insert(f.atom, f.interval); }
    bool insert(const RelationalAtom& atom, const Interval& interval);
    bool insert_bottom(const Interval& interval);

    bool entails(const Fact& f) const;
    bool entails(const RelationalAtom& atom, const Interval& interval) const;

    // nullptr when the atom has no intervals.
    const IntervalList* find(const RelationalAtom& atom) const;

    // Calls visit(extended substitution, intervals) for every stored atom matching pattern under partial.
    void match(const RelationalAtom& pattern, const Substitution& partial,
               const std::function<void(const Substitution&, const IntervalList&)>& visit) const;

    bool inconsistent() const { return !bottom_.empty(); }
    const IntervalList& bottom() const { return bottom_; }

    std::size_t atom_count() const { return entries_.size(); }
    std::size_t interval_count() const;
    std::vector<std::string> predicates() const;
    // Every stored atom with its list, in insertion order.
    void for_each(const std::function<void(const RelationalAtom&, const IntervalList&)>& visit) const;
    // Canonical fact list: atoms sorted, intervals in list order.
    std::vector<Fact> facts() const;
    std::string dump() const;

    // Full scan of the sortedness, coalescing, and index invariants.
    bool check_invariants(std::string* why = nullptr) const;

    friend bool store_equal(const FactStore& a, const FactStore& b);

private:
    struct Entry {
        RelationalAtom atom;
        std::shared_ptr<IntervalList> list;
    };
    struct PredIndex {
        std::vector<std::size_t> all;
        std::vector<std::unordered_map<std::string, std::vector<std::size_t>>> by_arg;
    };

    std::size_t entry_for(const RelationalAtom& atom);
    static bool insert_into(IntervalList& list, const Interval& iv);

    std::vector<Entry> entries_;
    std::unordered_map<RelationalAtom, std::size_t, AtomHash> by_key_;
    std::unordered_map<std::string, PredIndex> by_pred_;
    IntervalList bottom_;
};

bool store_equal(const FactStore& a, const FactStore& b);
FactStore restrict_to_body_predicates(const FactStore& store, const Program& p);

}  // namespace dmtl
