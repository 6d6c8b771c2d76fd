#include "dmtl/materialisation.hpp"

namespace dmtl {

const char* to_string(MatStatus s) {
    switch (s) {
        case MatStatus::Fixpoint: return "Fixpoint";
        case MatStatus::TargetEntailed: return "TargetEntailed";
        case MatStatus::RoundLimit: return "RoundLimit";
        case MatStatus::Inconsistent: return "Inconsistent";
        case MatStatus::Cancelled: return "Cancelled";
    }
    return "?";
}

FactStore apply_rules(const Program& p, const FactStore& input, ApplyStats* stats, const Interval* horizon) {
    std::vector<Derivation> derived;
    for (const auto& r : p.rules) {
        auto d = evaluate_rule(r, input, nullptr);
        derived.insert(derived.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
    }
    auto start = std::chrono::steady_clock::now();
    FactStore out = input;
    for (const auto& d : derived) {
        if (d.bottom) {
            out.insert_bottom(d.interval);
            continue;
        }
        out.insert(d.atom, horizon ? intersect(d.interval, *horizon) : d.interval);
    }
    if (stats) {
        stats->coalescing += std::chrono::steady_clock::now() - start;
        stats->derivations += derived.size();
    }
    return out;
}

MaterialisationOutcome materialise(const Program& p, FactStore store, const MaterialisationOptions& opts) {
    MaterialisationOutcome res;
    res.store = std::move(store);
    if (opts.horizon) {
        // Clip the input too, so the whole run lives inside the horizon.
        FactStore clipped;
        res.store.for_each([&](const RelationalAtom& a, const IntervalList& l) {
            for (const auto& iv : l) clipped.insert(a, intersect(iv, *opts.horizon));
        });
        for (const auto& iv : res.store.bottom()) clipped.insert_bottom(iv);
        res.store = std::move(clipped);
    }
    if (res.store.inconsistent()) {
        res.status = MatStatus::Inconsistent;
        return res;
    }
    if (opts.target && res.store.entails(*opts.target)) {
        res.status = MatStatus::TargetEntailed;
        return res;
    }
    const Interval* horizon = opts.horizon ? &*opts.horizon : nullptr;
    while (true) {
        if (opts.max_rounds && res.rounds >= *opts.max_rounds) {
            res.status = MatStatus::RoundLimit;
            return res;
        }
        if (opts.stop.stop_requested()) {
            res.status = MatStatus::Cancelled;
            return res;
        }
        ApplyStats stats;
        FactStore next = apply_rules(p, res.store, &stats, horizon);
        ++res.rounds;
        res.coalescing_time += stats.coalescing;
        res.round_coalescing.push_back(stats.coalescing);
        bool same = store_equal(next, res.store);
        res.store = std::move(next);
        if (opts.on_round) opts.on_round(res.rounds, res.store);
        if (res.store.inconsistent()) {
            res.status = MatStatus::Inconsistent;
            return res;
        }
        if (opts.target && res.store.entails(*opts.target)) {
            res.status = MatStatus::TargetEntailed;
            return res;
        }
        if (same) {
            res.status = MatStatus::Fixpoint;
            return res;
        }
    }
}

}  // namespace dmtl
