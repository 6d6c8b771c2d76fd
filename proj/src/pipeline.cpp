#include "dmtl/pipeline.hpp"

#include "dmtl/analysis.hpp"

#include <condition_variable>
#include <mutex>
#include <thread>

namespace dmtl {

const char* to_string(FactType t) {
    switch (t) {
        case FactType::T1: return "T1";
        case FactType::T2: return "T2";
        case FactType::T3: return "T3";
        case FactType::T4: return "T4";
        case FactType::T5: return "T5";
    }
    return "?";
}

const char* to_string(Winner w) {
    switch (w) {
        case Winner::FastPath: return "fastpath";
        case Winner::Materialisation: return "materialisation";
        case Winner::Automata: return "automata";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::nanoseconds since(Clock::time_point t0) { return Clock::now() - t0; }

bool has_bottom_rule(const Program& p) {
    for (const auto& r : p.rules)
        if (r.head.op() == Op::Bottom) return true;
    return false;
}

// Does `next` hold anything over the given predicates that `prev` lacks?
bool grew_over(const FactStore& prev, const FactStore& next, const std::set<std::string>& preds) {
    bool grew = false;
    next.for_each([&](const RelationalAtom& a, const IntervalList& l) {
        if (grew || !preds.count(a.predicate)) return;
        const IntervalList* old = prev.find(a);
        if (!old || *old != l) grew = true;
    });
    return grew;
}

// Fills answer, type and inconsistency from a materialisation exit.
bool settle(EntailmentResult& res, MatStatus status, FactType entailed, FactType fixpoint) {
    switch (status) {
        case MatStatus::TargetEntailed: res.answer = true; res.type = entailed; return true;
        case MatStatus::Inconsistent:
            res.answer = true;
            res.inconsistent = true;
            res.type = entailed;
            return true;
        case MatStatus::Fixpoint: res.answer = false; res.type = fixpoint; return true;
        default: return false;
    }
}

struct AutomataAnswer {
    bool entailed = false;
    bool inconsistent = false;
};

AutomataAnswer run_automata(const Program& relevant, const FactStore& pre, const Fact& query,
                            const AutomataOptions& opts) {
    std::vector<Fact> facts = pre.facts();
    ReductionOutput red = entail_to_inconsist(relevant, facts, query);
    AutomataAnswer a;
    a.entailed = !consistent(red.program, red.dataset, opts);
    // A positive answer may stem from Π and D alone having no model.
    if (a.entailed && has_bottom_rule(relevant)) a.inconsistent = !consistent(relevant, facts, opts);
    return a;
}

}  // namespace

PreMaterialisation pre_materialise(const Program& p, const FactStore& d, const std::optional<Fact>& target,
                                   std::size_t round_limit) {
    DependencyInfo info = dependency_info(p);
    std::set<std::string> nonrec;
    for (const auto& v : info.vertices)
        if (!info.recursive.count(v)) nonrec.insert(v);

    PreMaterialisation out;
    out.pre = d;
    out.current = d;
    while (out.rounds < round_limit) {
        ApplyStats stats;
        FactStore next = apply_rules(p, out.current, &stats);
        ++out.rounds;
        out.coalescing += stats.coalescing;
        bool same = store_equal(next, out.current);
        bool grew = grew_over(out.current, next, nonrec);
        out.current = std::move(next);
        if (out.current.inconsistent()) {
            out.exit = MatStatus::Inconsistent;
            break;
        }
        if (target && out.current.entails(*target)) {
            out.exit = MatStatus::TargetEntailed;
            break;
        }
        if (same) {
            out.exit = MatStatus::Fixpoint;
            break;
        }
        if (!grew) break;
        out.pre = out.current;
    }
    if (out.exit) out.pre = out.current;
    return out;
}

FactStore pre_materialise(const Program& p, const FactStore& d) {
    return pre_materialise(p, d, std::nullopt).pre;
}

EntailmentResult check_entailment(const Program& p, const FactStore& d, const Fact& query,
                                  const PipelineOptions& opts) {
    if (!query.atom.ground()) throw std::invalid_argument("query must be ground: " + query.str());
    if (query.interval.is_empty()) throw std::invalid_argument("query interval is empty");

    EntailmentResult res;
    auto start = Clock::now();
    auto finish = [&]() -> EntailmentResult {
        res.timings.total = since(start);
        return res;
    };

    auto t0 = Clock::now();
    bool fast = d.entails(query);
    res.timings.fast_path = since(t0);
    if (fast) {
        res.answer = true;
        res.type = FactType::T1;
        res.winner = Winner::FastPath;
        return finish();
    }

    t0 = Clock::now();
    Program relevant = relevant_rules(p, query.atom.predicate);
    res.relevant_rules = relevant.rules.size();
    res.recursive = is_recursive(relevant);
    res.timings.relevant_rules = since(t0);
    res.winner = Winner::Materialisation;

    if (!res.recursive) {
        t0 = Clock::now();
        MaterialisationOptions mo;
        mo.target = query;
        auto out = materialise(relevant, d, mo);
        res.timings.materialisation = since(t0);
        res.timings.coalescing = out.coalescing_time;
        res.rounds = out.rounds;
        settle(res, out.status, FactType::T2, FactType::T2);
        return finish();
    }

    t0 = Clock::now();
    PreMaterialisation pre = pre_materialise(relevant, d, query, opts.pre_round_limit);
    res.timings.pre_materialisation = since(t0);
    res.timings.coalescing = pre.coalescing;
    res.rounds = res.pre_rounds = pre.rounds;
    if (pre.exit && settle(res, *pre.exit, FactType::T4, FactType::T3)) return finish();

    // Thread 1 carries on from the last store; thread 2 works on D^pre.
    if (opts.sequential) {
        t0 = Clock::now();
        MaterialisationOptions mo;
        mo.target = query;
        mo.max_rounds = opts.round_budget > res.rounds ? opts.round_budget - res.rounds : 0;
        auto out = materialise(relevant, std::move(pre.current), mo);
        res.timings.materialisation = since(t0);
        res.timings.coalescing += out.coalescing_time;
        res.rounds += out.rounds;
        if (settle(res, out.status, FactType::T4, FactType::T3)) return finish();

        t0 = Clock::now();
        AutomataAnswer a;
        try {
            a = run_automata(relevant, pre.pre, query, opts.automata);
        } catch (const AutomataLimit& e) {
            throw PipelineLimit(std::string("materialisation round budget and automata limit both exhausted: ") +
                                e.what());
        }
        res.timings.automata = since(t0);
        res.answer = a.entailed;
        res.inconsistent = a.inconsistent;
        res.type = FactType::T5;
        res.winner = Winner::Automata;
        return finish();
    }

    // Single-result channel shared by the two workers.
    struct Channel {
        std::mutex m;
        std::condition_variable cv;
        int finished = 0;
        bool decided = false;
        EntailmentResult result;
        std::string failure;
    } ch;
    std::stop_source cancel;
    const std::size_t pre_rounds = res.rounds;
    auto deliver = [&](const EntailmentResult* r, std::string why) {
        std::lock_guard lock(ch.m);
        ++ch.finished;
        if (r && !ch.decided) {
            ch.decided = true;
            ch.result = *r;
            cancel.request_stop();
        } else if (!r && !why.empty()) {
            ch.failure += (ch.failure.empty() ? "" : "; ") + why;
        }
        ch.cv.notify_all();
    };

    FactStore dpre = pre.pre;
    FactStore current = std::move(pre.current);
    {
        std::jthread materialiser([&, base = res] {
            EntailmentResult r = base;
            auto w0 = Clock::now();
            MaterialisationOptions mo;
            mo.target = query;
            mo.stop = cancel.get_token();
            if (opts.max_rounds) mo.max_rounds = *opts.max_rounds > pre_rounds ? *opts.max_rounds - pre_rounds : 0;
            auto out = materialise(relevant, std::move(current), mo);
            r.timings.materialisation = since(w0);
            r.timings.coalescing += out.coalescing_time;
            r.rounds += out.rounds;
            r.winner = Winner::Materialisation;
            if (settle(r, out.status, FactType::T4, FactType::T3))
                deliver(&r, {});
            else
                deliver(nullptr, out.status == MatStatus::RoundLimit ? "materialisation round limit reached" : "");
        });
        std::jthread automaton([&, base = res] {
            EntailmentResult r = base;
            auto w0 = Clock::now();
            AutomataOptions ao = opts.automata;
            ao.stop = cancel.get_token();
            try {
                AutomataAnswer a = run_automata(relevant, dpre, query, ao);
                r.timings.automata = since(w0);
                r.answer = a.entailed;
                r.inconsistent = a.inconsistent;
                r.type = FactType::T5;
                r.winner = Winner::Automata;
                deliver(&r, {});
            } catch (const AutomataCancelled&) {
                deliver(nullptr, "");
            } catch (const std::exception& e) {
                deliver(nullptr, e.what());
            }
        });
        std::unique_lock lock(ch.m);
        ch.cv.wait(lock, [&] { return ch.decided || ch.finished == 2; });
        cancel.request_stop();
    }
    if (!ch.decided) throw PipelineLimit("no worker reached an answer: " + ch.failure);
    res = ch.result;
    return finish();
}

}  // namespace dmtl
