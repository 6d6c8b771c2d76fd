#include "dmtl/store.hpp"

#include <algorithm>
#include <set>

namespace dmtl {

std::size_t AtomHash::operator()(const RelationalAtom& a) const {
    std::size_t h = std::hash<std::string>{}(a.predicate);
    for (const auto& t : a.args) h = h * 1000003u ^ std::hash<std::string>{}(t.name);
    return h;
}

FactStore::FactStore(const std::vector<Fact>& facts) {
    for (const auto& f : facts) insert(f);
}

std::size_t FactStore::entry_for(const RelationalAtom& atom) {
    auto [it, fresh] = by_key_.emplace(atom, entries_.size());
    if (!fresh) return it->second;
    std::size_t id = entries_.size();
    entries_.push_back(Entry{atom, std::make_shared<IntervalList>()});
    PredIndex& pi = by_pred_[atom.predicate];
    pi.all.push_back(id);
    if (pi.by_arg.size() < atom.args.size()) pi.by_arg.resize(atom.args.size());
    for (std::size_t k = 0; k < atom.args.size(); ++k) pi.by_arg[k][atom.args[k].name].push_back(id);
    return id;
}

namespace {
// First index whose right bound is not below the left bound of iv.
std::size_t first_reaching(const IntervalList& list, const Interval& iv) {
    auto it = std::partition_point(list.begin(), list.end(), [&](const Interval& x) { return x.right() < iv.left(); });
    return static_cast<std::size_t>(it - list.begin());
}
}  // namespace

bool FactStore::insert_into(IntervalList& list, const Interval& iv) {
    std::size_t i0 = first_reaching(list, iv);
    for (std::size_t j = i0; j < std::min(list.size(), i0 + 2); ++j)
        if (subset(iv, list[j])) return false;
    Interval merged = iv;
    std::size_t start = i0, j = i0;
    while (j < list.size()) {
        if (auto u = union_if_coalescable(list[j], merged)) {
            merged = *u;
            ++j;
        } else if (list[j].right() <= merged.left()) {
            start = ++j;
        } else {
            break;
        }
    }
    list.erase(list.begin() + static_cast<std::ptrdiff_t>(start), list.begin() + static_cast<std::ptrdiff_t>(j));
    list.insert(list.begin() + static_cast<std::ptrdiff_t>(start), merged);
    return true;
}

bool FactStore::insert(const RelationalAtom& atom, const Interval& interval) {
    if (interval.is_empty()) return false;
    Entry& e = entries_[entry_for(atom)];
    if (e.list.use_count() > 1) {
        // Probe first so snapshots are not cloned for covered facts.
        if (entails(atom, interval)) return false;
        e.list = std::make_shared<IntervalList>(*e.list);
    }
    return insert_into(*e.list, interval);
}

bool FactStore::insert_bottom(const Interval& interval) {
    if (interval.is_empty()) return false;
    return insert_into(bottom_, interval);
}

const IntervalList* FactStore::find(const RelationalAtom& atom) const {
    auto it = by_key_.find(atom);
    if (it == by_key_.end()) return nullptr;
    return entries_[it->second].list.get();
}

bool FactStore::entails(const Fact& f) const { return entails(f.atom, f.interval); }

bool FactStore::entails(const RelationalAtom& atom, const Interval& interval) const {
    if (interval.is_empty()) return true;
    const IntervalList* list = find(atom);
    if (!list) return false;
    std::size_t i0 = first_reaching(*list, interval);
    for (std::size_t j = i0; j < std::min(list->size(), i0 + 2); ++j)
        if (subset(interval, (*list)[j])) return true;
    return false;
}

void FactStore::match(const RelationalAtom& pattern, const Substitution& partial,
                      const std::function<void(const Substitution&, const IntervalList&)>& visit) const {
    RelationalAtom p = dmtl::apply(pattern, partial);
    if (p.ground()) {
        if (const IntervalList* l = find(p)) visit(partial, *l);
        return;
    }
    auto pit = by_pred_.find(p.predicate);
    if (pit == by_pred_.end()) return;
    const PredIndex& pi = pit->second;
    const std::vector<std::size_t>* candidates = &pi.all;
    for (std::size_t k = 0; k < p.args.size() && k < pi.by_arg.size(); ++k) {
        if (p.args[k].is_variable()) continue;
        auto it = pi.by_arg[k].find(p.args[k].name);
        if (it == pi.by_arg[k].end()) return;
        if (it->second.size() < candidates->size()) candidates = &it->second;
    }
    for (std::size_t id : *candidates) {
        const Entry& e = entries_[id];
        if (e.atom.args.size() != p.args.size()) continue;
        Substitution s = partial;
        bool ok = true;
        for (std::size_t k = 0; k < p.args.size() && ok; ++k) {
            const Term& t = p.args[k];
            const std::string& c = e.atom.args[k].name;
            if (!t.is_variable()) {
                ok = t.name == c;
            } else {
                auto [it, fresh] = s.emplace(t.name, c);
                ok = fresh || it->second == c;
            }
        }
        if (ok) visit(s, *e.list);
    }
}

std::size_t FactStore::interval_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.list->size();
    return n;
}

std::vector<std::string> FactStore::predicates() const {
    std::vector<std::string> out;
    for (const auto& [p, _] : by_pred_) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

void FactStore::for_each(const std::function<void(const RelationalAtom&, const IntervalList&)>& visit) const {
    for (const auto& e : entries_)
        if (!e.list->empty()) visit(e.atom, *e.list);
}

std::vector<Fact> FactStore::facts() const {
    std::vector<const Entry*> sorted;
    for (const auto& e : entries_) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Entry* a, const Entry* b) { return a->atom < b->atom; });
    std::vector<Fact> out;
    for (const Entry* e : sorted)
        for (const auto& iv : *e->list) out.push_back(Fact{e->atom, iv});
    return out;
}

std::string FactStore::dump() const {
    std::string s;
    for (const auto& iv : bottom_) s += "# inconsistent: BOTTOM@" + iv.str() + "\n";
    for (const auto& f : facts()) s += f.str() + "\n";
    return s;
}

bool FactStore::check_invariants(std::string* why) const {
    auto bad = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    auto check_list = [&](const IntervalList& l, const std::string& name) {
        for (std::size_t i = 0; i < l.size(); ++i) {
            if (l[i].is_empty()) return bad(name + ": empty interval");
            if (i && !(l[i - 1] < l[i])) return bad(name + ": unsorted");
            if (i && union_if_coalescable(l[i - 1], l[i])) return bad(name + ": coalescable neighbours");
        }
        return true;
    };
    if (!check_list(bottom_, "BOTTOM")) return false;
    if (by_key_.size() != entries_.size()) return bad("key index size mismatch");
    std::size_t indexed = 0;
    for (const auto& [pred, pi] : by_pred_) {
        indexed += pi.all.size();
        for (std::size_t id : pi.all)
            if (id >= entries_.size() || entries_[id].atom.predicate != pred) return bad("predicate index mismatch");
        for (std::size_t k = 0; k < pi.by_arg.size(); ++k)
            for (const auto& [c, ids] : pi.by_arg[k])
                for (std::size_t id : ids) {
                    const auto& a = entries_[id].atom;
                    if (a.predicate != pred || a.args.size() <= k || a.args[k].name != c)
                        return bad("argument index points at a non-matching atom");
                }
    }
    if (indexed != entries_.size()) return bad("predicate index size mismatch");
    for (std::size_t id = 0; id < entries_.size(); ++id) {
        const Entry& e = entries_[id];
        auto it = by_key_.find(e.atom);
        if (it == by_key_.end() || it->second != id) return bad("key index mismatch for " + e.atom.str());
        if (!check_list(*e.list, e.atom.str())) return false;
        const PredIndex& pi = by_pred_.at(e.atom.predicate);
        for (std::size_t k = 0; k < e.atom.args.size(); ++k) {
            auto ait = pi.by_arg[k].find(e.atom.args[k].name);
            if (ait == pi.by_arg[k].end() || std::find(ait->second.begin(), ait->second.end(), id) == ait->second.end())
                return bad("atom unreachable from argument index: " + e.atom.str());
        }
    }
    return true;
}

bool store_equal(const FactStore& a, const FactStore& b) {
    if (a.bottom_ != b.bottom_) return false;
    auto nonempty = [](const FactStore& s) {
        std::size_t n = 0;
        for (const auto& e : s.entries_) n += !e.list->empty();
        return n;
    };
    if (nonempty(a) != nonempty(b)) return false;
    for (const auto& e : a.entries_) {
        if (e.list->empty()) continue;
        const IntervalList* other = b.find(e.atom);
        if (!other) return false;
        if (other != e.list.get() && *other != *e.list) return false;
    }
    return true;
}

FactStore restrict_to_body_predicates(const FactStore& store, const Program& p) {
    std::set<std::string> body;
    for (const auto& r : p.rules)
        for (const auto& b : r.body) collect_predicates(b, body);
    FactStore out;
    store.for_each([&](const RelationalAtom& a, const IntervalList& l) {
        if (!body.count(a.predicate)) return;
        for (const auto& iv : l) out.insert(a, iv);
    });
    for (const auto& iv : store.bottom()) out.insert_bottom(iv);
    return out;
}

}  // namespace dmtl
