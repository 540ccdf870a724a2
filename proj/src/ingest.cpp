#include "convmem/ingest.hpp"

#include "convmem/errors.hpp"
#include "convmem/tir.hpp"
#include "convmem/tokenize.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace convmem {

namespace {

using nlohmann::json;

// Schema problems are collected so one load reports every violation at once.
struct ErrorCollector {
    std::vector<std::string> errors;

    void add(const std::string& where, const std::string& what) {
        errors.push_back(where + ": " + what);
    }
    void throw_if_any(const std::string& path) const {
        if (errors.empty()) return;
        std::string message = "failed to load " + path + ":";
        for (const auto& e : errors) message += "\n  " + e;
        throw LoadError(message);
    }
};

std::vector<std::pair<std::size_t, json>> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw LoadError("cannot open " + path);
    std::vector<std::pair<std::size_t, json>> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded())
            throw LoadError(path + " line " + std::to_string(line_no) + " is not valid JSON");
        lines.emplace_back(line_no, std::move(parsed));
    }
    return lines;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw LoadError("cannot open " + path);
    json parsed = json::parse(in, nullptr, false);
    if (parsed.is_discarded()) throw LoadError(path + " is not valid JSON");
    return parsed;
}

std::optional<std::string> opt_string(const json& object, const std::string& key,
                                      const std::string& where, ErrorCollector& errors) {
    if (!object.contains(key)) return std::nullopt;
    if (!object[key].is_string()) {
        errors.add(where + "." + key, "expected a string");
        return std::nullopt;
    }
    return object[key].get<std::string>();
}

std::string require_string(const json& object, const std::string& key, const std::string& where,
                           ErrorCollector& errors) {
    if (!object.contains(key) || !object[key].is_string()) {
        errors.add(where, "missing string field \"" + key + "\"");
        return {};
    }
    return object[key].get<std::string>();
}

// Gold answers in benchmark files are sometimes numbers; stringify those,
// refuse anything structured.
std::optional<std::string> answer_to_string(const json& value, const std::string& where,
                                            ErrorCollector& errors) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number() || value.is_boolean()) return value.dump();
    errors.add(where, "answer must be a string or number");
    return std::nullopt;
}

std::vector<Utterance> parse_utterances(const json& list, const std::string& speaker_key,
                                        const std::string& text_key, const std::string& where,
                                        ErrorCollector& errors) {
    std::vector<Utterance> utterances;
    if (!list.is_array()) {
        errors.add(where, "expected an array of utterances");
        return utterances;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string slot = where + "[" + std::to_string(i) + "]";
        const auto& item = list[i];
        if (!item.is_object()) {
            errors.add(slot, "expected an object");
            continue;
        }
        Utterance u;
        u.speaker = require_string(item, speaker_key, slot, errors);
        u.text = require_string(item, text_key, slot, errors);
        utterances.push_back(std::move(u));
    }
    return utterances;
}

void check_gt_resolvable(const MemoryBank& bank, const std::vector<Query>& queries) {
    std::set<std::string> dangling;
    for (const auto& query : queries)
        for (const auto& id : query.gt_session_ids)
            if (bank.find_session(id) == nullptr) dangling.insert(id);
    if (dangling.empty()) return;
    std::string message = "queries reference unknown session ids:";
    for (const auto& id : dangling) message += " " + id;
    throw ValidationError(message);
}

DatasetBundle finish_bundle(std::vector<Session> sessions, std::vector<Query> queries,
                            std::string name) {
    DatasetBundle bundle;
    bundle.bank = construct_bank(std::move(sessions));
    check_gt_resolvable(bundle.bank, queries);
    bundle.queries = std::move(queries);
    bundle.dataset_name = std::move(name);
    bundle.stats = compute_stats(bundle.bank);
    return bundle;
}

DatasetBundle load_generic(const std::string& dir) {
    const std::string sessions_path = (std::filesystem::path(dir) / "sessions.jsonl").string();
    const std::string queries_path = (std::filesystem::path(dir) / "queries.jsonl").string();

    ErrorCollector errors;
    std::vector<Session> sessions;
    for (const auto& [line_no, object] : read_jsonl(sessions_path)) {
        const std::string where = "sessions.jsonl line " + std::to_string(line_no);
        if (!object.is_object()) {
            errors.add(where, "expected an object");
            continue;
        }
        Session session;
        session.session_id = require_string(object, "session_id", where, errors);
        session.date = opt_string(object, "date", where, errors);
        if (!object.contains("utterances")) {
            errors.add(where, "missing \"utterances\"");
            continue;
        }
        session.turns = pair_utterances(
            parse_utterances(object["utterances"], "speaker", "text", where + ".utterances", errors));
        sessions.push_back(std::move(session));
    }

    std::vector<Query> queries;
    for (const auto& [line_no, object] : read_jsonl(queries_path)) {
        const std::string where = "queries.jsonl line " + std::to_string(line_no);
        if (!object.is_object()) {
            errors.add(where, "expected an object");
            continue;
        }
        Query query;
        query.text = require_string(object, "text", where, errors);
        query.date = opt_string(object, "date", where, errors);
        query.query_type = opt_string(object, "type", where, errors);
        if (object.contains("gold_answer"))
            query.gold_answer = answer_to_string(object["gold_answer"], where + ".gold_answer", errors);
        if (object.contains("gt_session_ids")) {
            if (!object["gt_session_ids"].is_array()) {
                errors.add(where + ".gt_session_ids", "expected an array of strings");
            } else {
                for (const auto& id : object["gt_session_ids"]) {
                    if (!id.is_string())
                        errors.add(where + ".gt_session_ids", "expected an array of strings");
                    else
                        query.gt_session_ids.push_back(id.get<std::string>());
                }
            }
        }
        queries.push_back(std::move(query));
    }
    errors.throw_if_any(dir);

    return finish_bundle(std::move(sessions), std::move(queries),
                         std::filesystem::path(dir).filename().string());
}

const std::map<int, std::string>& category_names() {
    static const std::map<int, std::string> names{{1, "multi-hop"},
                                                  {2, "temporal"},
                                                  {3, "open-domain"},
                                                  {4, "single-hop"},
                                                  {5, "adversarial"}};
    return names;
}

// Evidence ids look like "D1:3": conversation session 1, utterance 3.
std::optional<std::string> evidence_to_session_id(const std::string& dia_id) {
    if (dia_id.size() < 2 || dia_id[0] != 'D') return std::nullopt;
    const std::size_t colon = dia_id.find(':');
    const std::string number = dia_id.substr(1, colon == std::string::npos ? std::string::npos
                                                                           : colon - 1);
    if (number.empty() ||
        !std::all_of(number.begin(), number.end(), [](char c) { return c >= '0' && c <= '9'; }))
        return std::nullopt;
    return "session_" + number;
}

DatasetBundle load_locomo_sample(const json& sample, std::size_t sample_index,
                                 const std::string& path) {
    ErrorCollector errors;
    const std::string where = "sample " + std::to_string(sample_index);
    if (!sample.is_object() || !sample.contains("conversation") ||
        !sample["conversation"].is_object())
        throw LoadError(path + " " + where + ": missing \"conversation\" object");
    const json& conversation = sample["conversation"];

    std::map<int, Session> sessions_by_number;
    for (const auto& [key, value] : conversation.items()) {
        const std::string prefix = "session_";
        if (key.rfind(prefix, 0) != 0) continue;
        const std::string rest = key.substr(prefix.size());
        if (!std::all_of(rest.begin(), rest.end(),
                         [](char c) { return c >= '0' && c <= '9'; }))
            continue;  // session_N_date_time and friends
        const int number = std::stoi(rest);
        Session session;
        session.session_id = key;
        const std::string date_key = key + "_date_time";
        if (conversation.contains(date_key) && conversation[date_key].is_string())
            session.date = conversation[date_key].get<std::string>();
        session.turns = pair_utterances(parse_utterances(
            value, "speaker", "text", where + ".conversation." + key, errors));
        sessions_by_number.emplace(number, std::move(session));
    }

    std::vector<Session> sessions;
    for (auto& [number, session] : sessions_by_number) sessions.push_back(std::move(session));

    std::vector<Query> queries;
    if (sample.contains("qa")) {
        if (!sample["qa"].is_array()) {
            errors.add(where + ".qa", "expected an array");
        } else {
            for (std::size_t i = 0; i < sample["qa"].size(); ++i) {
                const std::string slot = where + ".qa[" + std::to_string(i) + "]";
                const auto& item = sample["qa"][i];
                Query query;
                query.text = require_string(item, "question", slot, errors);
                if (item.contains("answer"))
                    query.gold_answer = answer_to_string(item["answer"], slot + ".answer", errors);
                if (item.contains("category")) {
                    if (!item["category"].is_number_integer()) {
                        errors.add(slot + ".category", "expected an integer");
                    } else {
                        const int category = item["category"].get<int>();
                        auto it = category_names().find(category);
                        if (it == category_names().end())
                            errors.add(slot + ".category",
                                       "unrecognized category " + std::to_string(category));
                        else
                            query.query_type = it->second;
                    }
                }
                if (item.contains("evidence")) {
                    if (!item["evidence"].is_array()) {
                        errors.add(slot + ".evidence", "expected an array");
                    } else {
                        for (const auto& ev : item["evidence"]) {
                            if (!ev.is_string()) {
                                errors.add(slot + ".evidence", "expected dialogue-id strings");
                                continue;
                            }
                            auto id = evidence_to_session_id(ev.get<std::string>());
                            if (!id) {
                                errors.add(slot + ".evidence",
                                           "unrecognized dialogue id \"" + ev.get<std::string>() + "\"");
                                continue;
                            }
                            if (std::find(query.gt_session_ids.begin(), query.gt_session_ids.end(),
                                          *id) == query.gt_session_ids.end())
                                query.gt_session_ids.push_back(*id);
                        }
                    }
                }
                queries.push_back(std::move(query));
            }
        }
    }
    errors.throw_if_any(path);

    std::string name = "sample_" + std::to_string(sample_index);
    if (sample.contains("sample_id") && sample["sample_id"].is_string())
        name = sample["sample_id"].get<std::string>();
    return finish_bundle(std::move(sessions), std::move(queries), std::move(name));
}

DatasetBundle load_longmemeval_sample(const json& entry, std::size_t sample_index,
                                      const std::string& path) {
    ErrorCollector errors;
    const std::string where = "entry " + std::to_string(sample_index);
    if (!entry.is_object()) throw LoadError(path + " " + where + ": expected an object");

    const json& ids = entry.value("haystack_session_ids", json::array());
    const json& dates = entry.value("haystack_dates", json::array());
    const json& haystack = entry.value("haystack_sessions", json::array());
    if (!ids.is_array() || !haystack.is_array() || ids.size() != haystack.size())
        throw LoadError(path + " " + where +
                        ": haystack_session_ids and haystack_sessions must be arrays of equal length");
    if (!dates.empty() && dates.size() != ids.size())
        throw LoadError(path + " " + where + ": haystack_dates length mismatch");

    std::vector<Session> sessions;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string slot = where + ".haystack_sessions[" + std::to_string(i) + "]";
        Session session;
        if (!ids[i].is_string()) {
            errors.add(where + ".haystack_session_ids", "expected strings");
            continue;
        }
        session.session_id = ids[i].get<std::string>();
        if (i < dates.size() && dates[i].is_string()) session.date = dates[i].get<std::string>();
        session.turns = pair_utterances(parse_utterances(haystack[i], "role", "content", slot, errors));
        sessions.push_back(std::move(session));
    }

    Query query;
    query.text = require_string(entry, "question", where, errors);
    query.date = opt_string(entry, "question_date", where, errors);
    query.query_type = opt_string(entry, "question_type", where, errors);
    if (entry.contains("answer"))
        query.gold_answer = answer_to_string(entry["answer"], where + ".answer", errors);
    if (entry.contains("answer_session_ids")) {
        if (!entry["answer_session_ids"].is_array()) {
            errors.add(where + ".answer_session_ids", "expected an array");
        } else {
            for (const auto& id : entry["answer_session_ids"]) {
                if (id.is_string())
                    query.gt_session_ids.push_back(id.get<std::string>());
                else
                    errors.add(where + ".answer_session_ids", "expected strings");
            }
        }
    }
    errors.throw_if_any(path);

    std::string name = "question_" + std::to_string(sample_index);
    if (entry.contains("question_id") && entry["question_id"].is_string())
        name = entry["question_id"].get<std::string>();
    return finish_bundle(std::move(sessions), {std::move(query)}, std::move(name));
}

std::vector<json> samples_of(const std::string& path) {
    json document = read_json_file(path);
    if (document.is_array()) return std::vector<json>(document.begin(), document.end());
    if (document.is_object()) return {std::move(document)};
    throw LoadError(path + ": expected a JSON array of samples or a single sample object");
}

} // namespace

DatasetFormat dataset_format_from_string(const std::string& name) {
    if (name == "generic_jsonl") return DatasetFormat::generic_jsonl;
    if (name == "locomo_like") return DatasetFormat::locomo_like;
    if (name == "longmemeval_like") return DatasetFormat::longmemeval_like;
    throw ValidationError("unknown dataset format: " + name);
}

std::string to_string(DatasetFormat format) {
    switch (format) {
    case DatasetFormat::generic_jsonl: return "generic_jsonl";
    case DatasetFormat::locomo_like: return "locomo_like";
    case DatasetFormat::longmemeval_like: return "longmemeval_like";
    }
    throw ValidationError("unknown dataset format");
}

DatasetStats compute_stats(const MemoryBank& bank) {
    DatasetStats stats;
    stats.session_count = bank.sessions.size();
    for (const auto& session : bank.sessions) {
        stats.turn_count += session.turns.size();
        for (const auto& turn : session.turns)
            stats.token_estimate += count_fallback_tokens(serialize_turn(turn));
    }
    return stats;
}

DatasetBundle load_dataset(const std::string& path, DatasetFormat format,
                           std::optional<std::size_t> sample_index) {
    if (format == DatasetFormat::generic_jsonl) {
        if (sample_index.value_or(0) != 0)
            throw ValidationError("generic_jsonl datasets hold a single sample");
        return load_generic(path);
    }
    const auto samples = samples_of(path);
    const std::size_t index = sample_index.value_or(0);
    if (index >= samples.size())
        throw ValidationError("sample index " + std::to_string(index) + " out of range; " + path +
                              " holds " + std::to_string(samples.size()) + " samples");
    return format == DatasetFormat::locomo_like
               ? load_locomo_sample(samples[index], index, path)
               : load_longmemeval_sample(samples[index], index, path);
}

std::vector<DatasetBundle> load_dataset_multi(const std::string& path, DatasetFormat format) {
    if (format == DatasetFormat::generic_jsonl) {
        std::vector<DatasetBundle> bundles;
        bundles.push_back(load_generic(path));
        return bundles;
    }
    const auto samples = samples_of(path);
    std::vector<DatasetBundle> bundles;
    bundles.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        bundles.push_back(format == DatasetFormat::locomo_like
                              ? load_locomo_sample(samples[i], i, path)
                              : load_longmemeval_sample(samples[i], i, path));
    return bundles;
}

void save_generic_jsonl(const DatasetBundle& bundle, const std::string& dir) {
    std::filesystem::create_directories(dir);

    std::ofstream sessions_out(std::filesystem::path(dir) / "sessions.jsonl", std::ios::trunc);
    if (!sessions_out.is_open()) throw LoadError("cannot write sessions.jsonl under " + dir);
    for (const auto& session : bundle.bank.sessions) {
        json utterances = json::array();
        for (const auto& turn : session.turns) {
            utterances.push_back({{"speaker", turn.request.speaker}, {"text", turn.request.text}});
            if (turn.response)
                utterances.push_back(
                    {{"speaker", turn.response->speaker}, {"text", turn.response->text}});
        }
        json line{{"session_id", session.session_id}, {"utterances", std::move(utterances)}};
        if (session.date) line["date"] = *session.date;
        sessions_out << line.dump() << '\n';
    }

    std::ofstream queries_out(std::filesystem::path(dir) / "queries.jsonl", std::ios::trunc);
    if (!queries_out.is_open()) throw LoadError("cannot write queries.jsonl under " + dir);
    for (const auto& query : bundle.queries) {
        json line{{"text", query.text}};
        if (query.date) line["date"] = *query.date;
        if (query.query_type) line["type"] = *query.query_type;
        if (!query.gt_session_ids.empty()) line["gt_session_ids"] = query.gt_session_ids;
        if (query.gold_answer) line["gold_answer"] = *query.gold_answer;
        queries_out << line.dump() << '\n';
    }
    if (!sessions_out || !queries_out) throw LoadError("write to " + dir + " failed");
}

} // namespace convmem
