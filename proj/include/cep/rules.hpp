#pragma once

#include <string>
#include <string_view>

#include "cep/core.hpp"
#include "cep/error.hpp"

namespace cep {

/// Parses the `.cep` rule language:
///
///     ruleset     := classes_decl fluent_decl+
///     classes_decl:= "classes" name ("," name)* ";"
///     fluent_decl := "fluent" name "{" "start" ":" pattern ";" "end" ":" pattern ";" "}"
///     pattern     := "repeat" "(" name "," "count" "=" int "," "window" "=" int ")"
///
/// Whitespace is insignificant and `#` starts a line comment. Class ids follow
/// declaration order. Throws ParseError (syntax or semantic) with a span.
RuleSet parse_ruleset(std::string_view text);

/// Canonical text form; parse_ruleset(pretty_print(rs)) == rs.
std::string pretty_print(const RuleSet& rs);

/// "file:line:col: error: message" rendering of a parse error.
std::string format_diagnostic(const ParseError& e, std::string_view filename);

}  // namespace cep
