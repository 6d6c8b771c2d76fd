#pragma once

#include "dmtl/syntax.hpp"

#include <string_view>
#include <vector>

namespace dmtl {

// Concrete syntax:
//   rule     := head ":-" literal ("," literal)* "."
//   literal  := unary (("SINCE" | "UNTIL") interval unary)?
//   unary    := "TOP" | "BOTTOM" | OPKW interval unary | atom | "(" literal ")"
//   atom     := Ident ("(" term ("," term)* ")")?
//   fact     := atom "@" interval
// Identifiers starting with an uppercase letter or '_' are variables when used as terms.
// '#' starts a comment that runs to the end of the line.
Program parse_program(std::string_view text);
std::vector<Fact> parse_dataset(std::string_view text);
Fact parse_fact(std::string_view text);
MetricAtom parse_metric_atom(std::string_view text);

// File helpers; throw std::runtime_error when the file cannot be read.
std::string read_file(const std::string& path);
Program load_program(const std::string& path);
std::vector<Fact> load_dataset(const std::string& path);

}  // namespace dmtl
