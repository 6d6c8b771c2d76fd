#include "dmtl/analysis.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace dmtl {

DependencyInfo dependency_info(const Program& p) {
    DependencyInfo info;
    std::set<std::string> verts;
    for (const auto& r : p.rules) {
        auto body = r.body_predicates();
        verts.insert(body.begin(), body.end());
        auto head = r.head_predicate();
        if (!head) continue;
        verts.insert(*head);
        for (const auto& b : body) info.edges[b].insert(*head);
    }
    info.vertices.assign(verts.begin(), verts.end());

    // Tarjan's algorithm.
    std::map<std::string, int> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    int counter = 0;
    std::vector<std::vector<std::string>> reversed_topo;
    std::function<void(const std::string&)> strong = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : info.edges[v]) {
            if (!index.count(w)) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::string> comp;
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            reversed_topo.push_back(std::move(comp));
        }
    };
    for (const auto& v : info.vertices)
        if (!index.count(v)) strong(v);
    info.sccs.assign(reversed_topo.rbegin(), reversed_topo.rend());

    std::deque<std::string> queue;
    for (const auto& comp : info.sccs) {
        bool cyclic = comp.size() > 1 || info.edges[comp[0]].count(comp[0]);
        if (!cyclic) continue;
        for (const auto& v : comp)
            if (info.recursive.insert(v).second) queue.push_back(v);
    }
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        for (const auto& w : info.edges[v])
            if (info.recursive.insert(w).second) queue.push_back(w);
    }
    for (auto it = info.edges.begin(); it != info.edges.end();) {
        if (it->second.empty())
            it = info.edges.erase(it);
        else
            ++it;
    }
    return info;
}

std::string DependencyInfo::dot() const {
    std::string s = "digraph dependencies {\n";
    for (const auto& v : vertices)
        s += "  \"" + v + "\"" + (recursive.count(v) ? " [style=filled, fillcolor=lightgrey]" : "") + ";\n";
    for (const auto& [from, tos] : edges)
        for (const auto& to : tos) s += "  \"" + from + "\" -> \"" + to + "\";\n";
    return s + "}\n";
}

Program relevant_rules(const Program& p, const std::string& predicate) {
    DependencyInfo info = dependency_info(p);
    std::set<std::string> targets;
    for (const auto& r : p.rules) {
        auto h = r.head_predicate();
        if (h && *h != predicate) continue;
        auto b = r.body_predicates();
        targets.insert(b.begin(), b.end());
    }
    // Predicates with a path (possibly empty) to a target: backwards closure.
    std::map<std::string, std::set<std::string>> reverse;
    for (const auto& [from, tos] : info.edges)
        for (const auto& to : tos) reverse[to].insert(from);
    std::set<std::string> reaching = targets;
    std::deque<std::string> queue(targets.begin(), targets.end());
    while (!queue.empty()) {
        std::string v = queue.front();
        queue.pop_front();
        for (const auto& u : reverse[v])
            if (reaching.insert(u).second) queue.push_back(u);
    }
    Program out;
    for (const auto& r : p.rules) {
        auto h = r.head_predicate();
        if (!h || *h == predicate || reaching.count(*h)) out.rules.push_back(r);
    }
    return out;
}

bool is_recursive(const Program& p) { return !dependency_info(p).recursive.empty(); }

Program nonrecursive_head_rules(const Program& p) {
    DependencyInfo info = dependency_info(p);
    Program out;
    for (const auto& r : p.rules) {
        auto h = r.head_predicate();
        if (!h || !info.recursive.count(*h)) out.rules.push_back(r);
    }
    return out;
}

}  // namespace dmtl
