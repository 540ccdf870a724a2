#include "convmem/prompts.hpp"

#include "convmem/errors.hpp"
#include "convmem/prompts_data.hpp"

namespace convmem {

const std::string& prune_template() {
    static const std::string tpl = prompt_data::prune_v1;
    return tpl;
}

const std::string& qa_template() {
    static const std::string tpl = prompt_data::qa_v1;
    return tpl;
}

const std::string& judge_template() {
    static const std::string tpl = prompt_data::judge_v1;
    return tpl;
}

std::string render_template(
    const std::string& tpl,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        std::size_t best = std::string::npos;
        std::size_t best_sub = 0;
        for (std::size_t i = 0; i < substitutions.size(); ++i) {
            std::size_t found = tpl.find(substitutions[i].first, pos);
            if (found < best) {
                best = found;
                best_sub = i;
            }
        }
        if (best == std::string::npos) {
            out.append(tpl, pos, std::string::npos);
            break;
        }
        out.append(tpl, pos, best - pos);
        out.append(substitutions[best_sub].second);
        pos = best + substitutions[best_sub].first.size();
    }
    return out;
}

std::string drop_line_with(const std::string& tpl, const std::string& marker) {
    const std::size_t found = tpl.find(marker);
    if (found == std::string::npos)
        throw ValidationError("template has no line containing \"" + marker + "\"");
    std::size_t line_start = tpl.rfind('\n', found);
    line_start = (line_start == std::string::npos) ? 0 : line_start + 1;
    std::size_t line_end = tpl.find('\n', found);
    line_end = (line_end == std::string::npos) ? tpl.size() : line_end + 1;
    return tpl.substr(0, line_start) + tpl.substr(line_end);
}

} // namespace convmem
