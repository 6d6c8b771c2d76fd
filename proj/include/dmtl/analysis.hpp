#pragma once

#include "dmtl/syntax.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace dmtl {

struct DependencyInfo {
    std::vector<std::string> vertices;                   // sorted predicate names
    std::map<std::string, std::set<std::string>> edges;  // body predicate -> head predicates
    std::vector<std::vector<std::string>> sccs;          // in topological order of the condensation
    std::set<std::string> recursive;

    std::string dot() const;
};

DependencyInfo dependency_info(const Program& p);
Program relevant_rules(const Program& p, const std::string& predicate);
bool is_recursive(const Program& p);
Program nonrecursive_head_rules(const Program& p);

}  // namespace dmtl
