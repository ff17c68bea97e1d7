#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ectfuzz/trace.hpp"

namespace ectfuzz::targets {

/// Objects, arrays, strings (with escapes), integers and true/false/null.
/// A `\u0000` escape is a planted crash.
Outcome json_subset(TraceContext& ctx);
/// `return`-statements and arithmetic with calls, a lexer switch over
/// punctuation, identifier classification loops. Integer literals longer
/// than nine digits are a planted crash.
Outcome expr_lang(TraceContext& ctx);
/// `[section]`, `key=value`, `;`/`#` comments, blank lines. Section names
/// longer than sixteen bytes are a planted crash.
Outcome ini_lang(TraceContext& ctx);
/// Classifies every byte with an isdigit-style check; accepts non-empty
/// all-digit inputs.
Outcome digits(TraceContext& ctx);

/// Plain recognizers with the same grammars, written without the DSL.
Outcome::Kind json_reference(std::string_view in);
Outcome::Kind expr_reference(std::string_view in);
Outcome::Kind ini_reference(std::string_view in);
Outcome::Kind digits_reference(std::string_view in);

const std::vector<ProgramUnderTest>& registry();
/// Throws std::invalid_argument for unknown names.
const ProgramUnderTest& find(std::string_view name);
Outcome::Kind reference_outcome(std::string_view name, std::string_view in);

}  // namespace ectfuzz::targets
