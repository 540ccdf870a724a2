#pragma once

#include <string>
#include <utility>
#include <vector>

namespace convmem {

// Versioned prompt templates, embedded at build time from assets/prompts/.
// Placeholders use <angle_bracket> syntax.
const std::string& prune_template();
const std::string& qa_template();
const std::string& judge_template();

/// Single left-to-right pass over the template. Substituted values are never
/// rescanned, so context text survives byte-identical even when it happens
/// to contain a placeholder.
std::string render_template(const std::string& tpl,
                            const std::vector<std::pair<std::string, std::string>>& substitutions);

/// Removes the template line containing the marker, including its trailing
/// newline. Used for optional lines such as the question date.
std::string drop_line_with(const std::string& tpl, const std::string& marker);

} // namespace convmem
