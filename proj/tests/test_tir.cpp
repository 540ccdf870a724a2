#include "convmem/embedding_cache.hpp"
#include "convmem/errors.hpp"
#include "convmem/mock_providers.hpp"
#include "convmem/tir.hpp"
#include "oracles.hpp"
#include "util.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>

using namespace convmem;

namespace {

/// Bank whose turn vectors are hand-planted; turn texts are unique so the
/// scripted provider can address them.
struct PlantedBank {
    MemoryBank bank;
    std::map<std::string, EmbeddingVector> vectors;
    int dim = 0;

    ScriptedEmbeddingProvider provider(const std::string& label = "scripted") const {
        return ScriptedEmbeddingProvider(dim, vectors, label);
    }
};

PlantedBank plant(int dim, const std::vector<std::vector<EmbeddingVector>>& turn_vectors,
                  const std::map<std::string, EmbeddingVector>& query_vectors = {}) {
    PlantedBank planted;
    planted.dim = dim;
    planted.vectors = query_vectors;
    std::vector<Session> sessions;
    int counter = 0;
    for (std::size_t s = 0; s < turn_vectors.size(); ++s) {
        Session session;
        session.session_id = "p" + std::to_string(s);
        for (std::size_t t = 0; t < turn_vectors[s].size(); ++t) {
            Turn turn;
            turn.turn_index = static_cast<int>(t);
            turn.request = {"A", "turn " + std::to_string(counter++)};
            planted.vectors[serialize_turn(turn)] = turn_vectors[s][t];
            session.turns.push_back(std::move(turn));
        }
        sessions.push_back(std::move(session));
    }
    planted.bank = construct_bank(std::move(sessions));
    return planted;
}

std::vector<EmbeddingVector> scalar_turns(const std::vector<double>& values) {
    std::vector<EmbeddingVector> out;
    for (double v : values) out.push_back({v});
    return out;
}

std::vector<std::string> ranked_ids(const RetrievalResult& result) {
    std::vector<std::string> ids;
    for (const auto& r : result.ranked) ids.push_back(r.session_id);
    return ids;
}

} // namespace

TEST_SUITE("tir") {

TEST_CASE("serialize_turn") {
    Turn lone{{"alice", "how are you?"}, std::nullopt, 0};
    CHECK(serialize_turn(lone) == "alice: how are you?");

    Turn paired{{"alice", "how are you?"}, Utterance{"bob", "fine"}, 0};
    CHECK(serialize_turn(paired) == "alice: how are you?\nbob: fine");

    Turn multiline{{"a", "line one\nline two"}, std::nullopt, 0};
    CHECK(serialize_turn(multiline) == "a: line one\nline two");
}

TEST_CASE("turn_similarity is a plain inner product") {
    CHECK(turn_similarity({1.0, 0.0}, {1.0, 0.0}) == 1.0);
    CHECK(turn_similarity({1.0, 0.0}, {0.0, 1.0}) == 0.0);
    CHECK(turn_similarity({1.0, 2.0}, {3.0, 4.0}) == 11.0);
    CHECK_THROWS_AS(turn_similarity({1.0}, {1.0, 2.0}), ValidationError);
}

TEST_CASE("turn_similarity accumulates in index order") {
    SplitMix rng(5);
    for (int round = 0; round < 20; ++round) {
        EmbeddingVector a, b;
        for (int i = 0; i < 64; ++i) {
            a.push_back(rng.next_signed());
            b.push_back(rng.next_signed());
        }
        CHECK(turn_similarity(a, b) == oracle::dot(a, b));
    }
}

TEST_CASE("session_score_max picks the first argmax") {
    auto score = session_score_max({1.0}, scalar_turns({0.2, 0.9, 0.1}));
    CHECK(score.score == 0.9);
    CHECK(score.best_turn_index == 1);
    CHECK(score.per_turn_scores == std::vector<double>{0.2, 0.9, 0.1});

    auto tie = session_score_max({1.0}, scalar_turns({0.7, 0.7}));
    CHECK(tie.score == 0.7);
    CHECK(tie.best_turn_index == 0);

    CHECK_THROWS_WITH_AS(session_score_max({1.0}, {}), doctest::Contains("no turns"),
                         ValidationError);
}

TEST_CASE("session_score_max equals brute force on random vectors") {
    SplitMix rng(17);
    for (int round = 0; round < 150; ++round) {
        const auto q = mock_embed(testutil::random_text(rng, 1, 5), 16, 3);
        std::vector<EmbeddingVector> turns;
        const int n = 1 + static_cast<int>(rng.next_below(20));
        std::vector<double> sims;
        for (int t = 0; t < n; ++t) {
            turns.push_back(mock_embed(testutil::random_text(rng, 1, 5), 16, 3));
            sims.push_back(turn_similarity(q, turns.back()));
        }
        const auto expect = oracle::brute_max(sims);
        const auto got = session_score_max(q, turns);
        CHECK(got.score == expect.score);
        CHECK(got.best_turn_index == expect.first_argmax);
    }
}

TEST_CASE("session_score_mean averages without re-normalizing") {
    CHECK(session_score_mean({1.0, 0.0}, {{1.0, 0.0}, {0.0, 1.0}}) == 0.5);
    CHECK(session_score_mean({1.0, 0.0}, {{1.0, 0.0}}) == 1.0);
    CHECK(session_score_mean({1.0, 0.0}, {{1.0, 0.0}, {-1.0, 0.0}}) == 0.0);
    CHECK(session_score_mean({1.0, 0.0}, {{2.0, 0.0}}) == 2.0);
    CHECK_THROWS_AS(session_score_mean({1.0}, {}), ValidationError);
    CHECK_THROWS_AS(session_score_mean({1.0, 0.0}, {{1.0, 0.0}, {1.0}}), ValidationError);
}

TEST_CASE("session_score_topk_turns") {
    CHECK(session_score_topk_turns({1.0}, scalar_turns({0.2, 0.9, 0.1}), 2) == (0.9 + 0.2) / 2.0);
    CHECK(session_score_topk_turns({1.0}, scalar_turns({0.4, 0.6}), 10) == (0.6 + 0.4) / 2.0);
    CHECK_THROWS_AS(session_score_topk_turns({1.0}, scalar_turns({0.4}), 0), ValidationError);
    CHECK_THROWS_AS(session_score_topk_turns({1.0}, {}, 1), ValidationError);
}

TEST_CASE("topk_turn_mean with m=1 reduces exactly to max") {
    SplitMix rng(23);
    for (int round = 0; round < 100; ++round) {
        const auto q = mock_embed(testutil::random_text(rng, 1, 4), 8, 9);
        std::vector<EmbeddingVector> turns;
        const int n = 1 + static_cast<int>(rng.next_below(12));
        for (int t = 0; t < n; ++t)
            turns.push_back(mock_embed(testutil::random_text(rng, 1, 4), 8, 9));
        CHECK(session_score_topk_turns(q, turns, 1) == session_score_max(q, turns).score);
    }
}

TEST_CASE("appending weaker turns never changes the session score") {
    SplitMix rng(31);
    for (int round = 0; round < 80; ++round) {
        const auto q = mock_embed(testutil::random_text(rng, 1, 4), 16, 2);
        std::vector<EmbeddingVector> turns;
        const int n = 1 + static_cast<int>(rng.next_below(10));
        for (int t = 0; t < n; ++t)
            turns.push_back(mock_embed(testutil::random_text(rng, 1, 4), 16, 2));
        const auto before = session_score_max(q, turns);

        auto grown = turns;
        int appended = 0;
        while (appended < 5) {
            auto cand = mock_embed(testutil::random_text(rng, 1, 4), 16, 2);
            if (turn_similarity(q, cand) <= before.score) {
                grown.push_back(std::move(cand));
                ++appended;
            }
        }
        const auto after = session_score_max(q, grown);
        CHECK(after.score == before.score);
        CHECK(after.best_turn_index == before.best_turn_index);

        EmbeddingVector stronger = q;
        for (double& x : stronger) x *= before.score + 0.5;
        grown.push_back(stronger);
        const auto bumped = session_score_max(q, grown);
        CHECK(bumped.score == turn_similarity(q, stronger));
        CHECK(bumped.best_turn_index == grown.size() - 1);
    }
}

TEST_CASE("strategy parsing and naming") {
    CHECK(Strategy::parse("max").kind == StrategyKind::max_activation);
    CHECK(Strategy::parse("max_activation").kind == StrategyKind::max_activation);
    CHECK(Strategy::parse("mean").kind == StrategyKind::mean_pool);
    CHECK(Strategy::parse("mean_pool").kind == StrategyKind::mean_pool);
    auto topk = Strategy::parse("topk_turn:3");
    CHECK(topk.kind == StrategyKind::topk_turn_mean);
    CHECK(topk.m == 3);
    CHECK(topk.name() == "topk_turn:3");
    CHECK(Strategy::parse("max").name() == "max");
    CHECK(Strategy::parse("mean").name() == "mean");
    // name() output always parses back to the same strategy.
    CHECK(Strategy::parse(topk.name()).m == 3);
    CHECK_THROWS_AS(Strategy::parse("bogus"), ValidationError);
    CHECK_THROWS_AS(Strategy::parse("topk_turn:0"), ValidationError);
    CHECK_THROWS_AS(Strategy::parse("topk_turn:abc"), ValidationError);
}

TEST_CASE("index fingerprint binds provider and normalization") {
    MockEmbeddingProvider provider(8, 1);
    CHECK(index_fingerprint(provider, true) == "mock_embedding|dim=8|seed=1|v1|normalize=1");
    CHECK(index_fingerprint(provider, false) == "mock_embedding|dim=8|seed=1|v1|normalize=0");
}

TEST_CASE("build_index lays out one vector per turn in bank order") {
    auto bank = construct_bank(
        {testutil::make_session("s0", {{"a", "one"}, {"b", "two"}, {"a", "three"}}),
         testutil::make_session("s1", {{"a", "four"}, {"b", "five"}, {"a", "six"}, {"b", "seven"}})});
    MockEmbeddingProvider provider(8, 1);
    auto index = build_index(bank, provider, true);

    CHECK(index.dim == 8);
    CHECK(index.normalized);
    CHECK(index.provider_fingerprint == "mock_embedding|dim=8|seed=1|v1|normalize=1");
    REQUIRE(index.per_session.size() == 2);
    CHECK(index.per_session[0].session_id == "s0");
    CHECK(index.per_session[0].turn_texts ==
          std::vector<std::string>{"a: one\nb: two", "a: three"});
    CHECK(index.per_session[1].turn_vectors.size() == 2);
    // Stored vectors are the renormalized provider output; mock embeddings
    // are unit norm already, but renormalization may still adjust an ulp.
    EmbeddingVector expected = mock_embed("a: one\nb: two", 8, 1);
    double norm_sq = 0.0;
    for (double x : expected) norm_sq += x * x;
    for (double& x : expected) x /= std::sqrt(norm_sq);
    CHECK(index.per_session[0].turn_vectors[0] == expected);
    CHECK(index.warnings.empty());
}

TEST_CASE("build_index normalizes stored vectors when asked") {
    auto planted = plant(2, {{{3.0, 4.0}}});
    auto provider = planted.provider();
    auto normalized = build_index(planted.bank, provider, true);
    CHECK(normalized.per_session[0].turn_vectors[0] == EmbeddingVector{0.6, 0.8});

    auto raw = build_index(planted.bank, provider, false);
    CHECK(raw.per_session[0].turn_vectors[0] == EmbeddingVector{3.0, 4.0});
    CHECK(raw.provider_fingerprint == provider.fingerprint() + "|normalize=0");
}

TEST_CASE("build_index leaves zero vectors unnormalized with a warning") {
    auto planted = plant(2, {{{0.0, 0.0}, {1.0, 0.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, true);
    CHECK(index.per_session[0].turn_vectors[0] == EmbeddingVector{0.0, 0.0});
    REQUIRE(index.warnings.size() == 1);
    CHECK(index.warnings[0].find("zero vector") != std::string::npos);
}

TEST_CASE("build_index on an empty bank") {
    MockEmbeddingProvider provider(8, 1);
    auto index = build_index(MemoryBank{}, provider, true);
    CHECK(index.per_session.empty());
    CHECK(index.dim == 8);
}

TEST_CASE("build_index is deterministic across worker counts") {
    SplitMix rng(41);
    auto bank = testutil::random_bank(rng, 12, 8);
    MockEmbeddingProvider p1(8, 4);
    MockEmbeddingProvider p4(8, 4);
    auto serial = build_index(bank, p1, true, nullptr, 1);
    auto parallel = build_index(bank, p4, true, nullptr, 4);
    REQUIRE(serial.per_session.size() == parallel.per_session.size());
    for (std::size_t s = 0; s < serial.per_session.size(); ++s)
        CHECK(serial.per_session[s].turn_vectors == parallel.per_session[s].turn_vectors);
    CHECK_THROWS_AS(build_index(bank, p1, true, nullptr, 0), ValidationError);
}

TEST_CASE("build_index reuses the cache on rebuild") {
    testutil::TempDir tmp;
    SplitMix rng(43);
    auto bank = testutil::random_bank(rng, 6, 5);
    MockEmbeddingProvider provider(8, 4);
    auto cache = EmbeddingCache::open(tmp.file("cache.jsonl"), provider.fingerprint(), 8);

    auto first = build_index(bank, provider, true, cache.get(), 2);
    const long embedded_once = provider.texts_embedded();
    CHECK(embedded_once > 0);

    auto second = build_index(bank, provider, true, cache.get(), 2);
    CHECK(provider.texts_embedded() == embedded_once);
    for (std::size_t s = 0; s < first.per_session.size(); ++s)
        CHECK(first.per_session[s].turn_vectors == second.per_session[s].turn_vectors);
}

TEST_CASE("retrieve ranks by score with index ties ascending") {
    auto planted = plant(1,
                         {scalar_turns({0.9}), scalar_turns({0.5}), scalar_turns({0.7})},
                         {{"q", {1.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, false);

    auto top2 = retrieve(index, "q", 2, Strategy{}, provider);
    CHECK(ranked_ids(top2) == std::vector<std::string>{"p0", "p2"});
    CHECK(top2.ranked[0].score == 0.9);
    CHECK(top2.ranked[1].score == 0.7);
    CHECK(top2.ranked[0].session_index == 0);
    CHECK(top2.ranked[1].session_index == 2);
    CHECK(top2.k == 2);

    auto all = retrieve(index, "q", 5, Strategy{}, provider);
    CHECK(all.ranked.size() == 3);
    CHECK(ranked_ids(all) == std::vector<std::string>{"p0", "p2", "p1"});

    CHECK_THROWS_AS(retrieve(index, "q", 0, Strategy{}, provider), ValidationError);
}

TEST_CASE("retrieve breaks exact ties by session_index") {
    auto planted = plant(1, {scalar_turns({0.7, 0.3}), scalar_turns({0.7})}, {{"q", {1.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, false);
    auto result = retrieve(index, "q", 2, Strategy{}, provider);
    CHECK(ranked_ids(result) == std::vector<std::string>{"p0", "p1"});
    CHECK(result.ranked[0].best_turn_index == 0);
}

TEST_CASE("best_turn_index stays the similarity argmax under every strategy") {
    auto planted = plant(1, {scalar_turns({0.2, 0.9, 0.1})}, {{"q", {1.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, false);
    for (const auto& name : {"max", "mean", "topk_turn:2"}) {
        auto result = retrieve(index, "q", 1, Strategy::parse(name), provider);
        CHECK(result.ranked[0].best_turn_index == 1);
    }
    auto mean = retrieve(index, "q", 1, Strategy::parse("mean"), provider);
    CHECK(mean.ranked[0].score == (0.2 + 0.9 + 0.1) / 3.0);
}

TEST_CASE("retrieve on an empty index returns no sessions") {
    MockEmbeddingProvider provider(8, 1);
    auto index = build_index(MemoryBank{}, provider, true);
    auto result = retrieve(index, "anything", 3, Strategy{}, provider);
    CHECK(result.ranked.empty());
    CHECK(result.k == 3);
}

TEST_CASE("retrieve refuses a provider that does not match the index") {
    auto planted = plant(1, {scalar_turns({0.5})}, {{"q", {1.0}}});
    auto built_with = planted.provider("one");
    auto index = build_index(planted.bank, built_with, false);
    auto other = planted.provider("two");
    CHECK_THROWS_WITH_AS(retrieve(index, "q", 1, Strategy{}, other),
                         doctest::Contains("does not match"), ValidationError);
}

TEST_CASE("retrieve normalizes the query only for normalized indexes") {
    auto planted = plant(2, {{{1.0, 0.0}}, {{0.0, 1.0}}}, {{"q", {2.0, 0.0}}});
    auto provider = planted.provider();

    auto normalized = build_index(planted.bank, provider, true);
    auto via_normalized = retrieve(normalized, "q", 2, Strategy{}, provider);
    CHECK(via_normalized.ranked[0].session_id == "p0");
    CHECK(via_normalized.ranked[0].score == 1.0);
    CHECK(via_normalized.ranked[1].score == 0.0);

    auto raw = build_index(planted.bank, provider, false);
    auto via_raw = retrieve(raw, "q", 2, Strategy{}, provider);
    CHECK(via_raw.ranked[0].score == 2.0);
}

TEST_CASE("retrieve keeps per-turn scores only when asked") {
    auto planted = plant(1, {scalar_turns({0.2, 0.9, 0.1})}, {{"q", {1.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, false);

    auto bare = retrieve(index, "q", 1, Strategy{}, provider);
    CHECK_FALSE(bare.ranked[0].per_turn_scores.has_value());

    auto kept = retrieve(index, "q", 1, Strategy{}, provider, true);
    REQUIRE(kept.ranked[0].per_turn_scores.has_value());
    CHECK(*kept.ranked[0].per_turn_scores == std::vector<double>{0.2, 0.9, 0.1});
    CHECK(kept.ranked[0].score == 0.9);
}

TEST_CASE("rankings are invariant under monotone score transforms") {
    SplitMix rng(53);
    for (int round = 0; round < 20; ++round) {
        const int n_sessions = 3 + static_cast<int>(rng.next_below(6));
        std::vector<std::vector<EmbeddingVector>> raw, transformed;
        for (int s = 0; s < n_sessions; ++s) {
            std::vector<EmbeddingVector> a, b;
            const int turns = 1 + static_cast<int>(rng.next_below(8));
            for (int t = 0; t < turns; ++t) {
                const double x = rng.next_signed();
                a.push_back({x});
                b.push_back({x * x * x + x});
            }
            raw.push_back(std::move(a));
            transformed.push_back(std::move(b));
        }
        auto planted_raw = plant(1, raw, {{"q", {1.0}}});
        auto planted_tf = plant(1, transformed, {{"q", {1.0}}});
        auto provider_raw = planted_raw.provider("raw");
        auto provider_tf = planted_tf.provider("tf");
        auto index_raw = build_index(planted_raw.bank, provider_raw, false);
        auto index_tf = build_index(planted_tf.bank, provider_tf, false);
        auto order_raw = retrieve(index_raw, "q", n_sessions, Strategy{}, provider_raw);
        auto order_tf = retrieve(index_tf, "q", n_sessions, Strategy{}, provider_tf);
        CHECK(ranked_ids(order_raw) == ranked_ids(order_tf));
        for (std::size_t i = 0; i < order_raw.ranked.size(); ++i)
            CHECK(order_raw.ranked[i].best_turn_index == order_tf.ranked[i].best_turn_index);
    }
}

TEST_CASE("max ranking and topk_turn:1 ranking coincide") {
    SplitMix rng(59);
    for (int round = 0; round < 30; ++round) {
        auto bank = testutil::random_bank(rng, 6, 6);
        MockEmbeddingProvider provider(8, 6);
        auto index = build_index(bank, provider, true);
        const auto query = testutil::random_text(rng, 1, 5);
        auto via_max = retrieve(index, query, 6, Strategy::parse("max"), provider);
        auto via_topk = retrieve(index, query, 6, Strategy::parse("topk_turn:1"), provider);
        REQUIRE(via_max.ranked.size() == via_topk.ranked.size());
        for (std::size_t i = 0; i < via_max.ranked.size(); ++i) {
            CHECK(via_max.ranked[i].session_id == via_topk.ranked[i].session_id);
            CHECK(via_max.ranked[i].score == via_topk.ranked[i].score);
        }
    }
}

TEST_CASE("noise turns dilute mean pooling but not max activation") {
    for (int noise_count : {0, 20}) {
        std::vector<std::vector<EmbeddingVector>> sessions;
        std::vector<EmbeddingVector> gt{{1.0, 0.0}};
        for (int n = 0; n < noise_count; ++n) {
            const double s = 0.05;
            gt.push_back({s, std::sqrt(1.0 - s * s)});
        }
        sessions.push_back(gt);
        for (int c = 0; c < 10; ++c)
            sessions.push_back({{0.25, std::sqrt(1.0 - 0.25 * 0.25)},
                                {0.25, std::sqrt(1.0 - 0.25 * 0.25)}});
        auto planted = plant(2, sessions, {{"q", {1.0, 0.0}}});
        auto provider = planted.provider();
        auto index = build_index(planted.bank, provider, false);

        auto via_max = retrieve(index, "q", 1, Strategy::parse("max"), provider);
        CHECK(via_max.ranked[0].session_id == "p0");
        CHECK(via_max.ranked[0].score == 1.0);

        auto via_mean = retrieve(index, "q", 1, Strategy::parse("mean"), provider);
        const double gt_mean = (1.0 + 0.05 * noise_count) / (1.0 + noise_count);
        if (noise_count == 0) {
            CHECK(via_mean.ranked[0].session_id == "p0");
        } else {
            CHECK(via_mean.ranked[0].session_id != "p0");
            CHECK(gt_mean < 0.25);
        }
    }
}

TEST_CASE("truncate_result") {
    auto planted = plant(1, {scalar_turns({0.9}), scalar_turns({0.5}), scalar_turns({0.7})},
                         {{"q", {1.0}}});
    auto provider = planted.provider();
    auto index = build_index(planted.bank, provider, false);
    auto full = retrieve(index, "q", 3, Strategy{}, provider);

    auto top1 = truncate_result(full, 1);
    CHECK(top1.ranked.size() == 1);
    CHECK(top1.k == 1);
    CHECK(top1.ranked[0].session_id == "p0");
    CHECK(full.ranked.size() == 3);

    auto wider = truncate_result(full, 10);
    CHECK(wider.ranked.size() == 3);
    CHECK_THROWS_AS(truncate_result(full, 0), ValidationError);
}

TEST_CASE("save_index and load_index round trip bit-exact") {
    testutil::TempDir tmp;
    SplitMix rng(61);
    auto bank = testutil::random_bank(rng, 5, 4);
    MockEmbeddingProvider provider(8, 2);
    auto index = build_index(bank, provider, true);

    const auto path = tmp.file("index.jsonl");
    save_index(index, path);
    auto loaded = load_index(path, index.provider_fingerprint);

    CHECK(loaded.dim == index.dim);
    CHECK(loaded.normalized == index.normalized);
    CHECK(loaded.provider_fingerprint == index.provider_fingerprint);
    REQUIRE(loaded.per_session.size() == index.per_session.size());
    for (std::size_t s = 0; s < index.per_session.size(); ++s) {
        CHECK(loaded.per_session[s].session_id == index.per_session[s].session_id);
        CHECK(loaded.per_session[s].turn_texts == index.per_session[s].turn_texts);
        CHECK(loaded.per_session[s].turn_vectors == index.per_session[s].turn_vectors);
    }
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

    auto retrieved = retrieve(loaded, bank.sessions[0].session_id, 2, Strategy{}, provider);
    CHECK(retrieved.ranked.size() == 2);
}

TEST_CASE("save_index stores one record per unique turn text") {
    auto bank = construct_bank({testutil::make_session("s0", {{"a", "same"}}),
                                testutil::make_session("s1", {{"a", "same"}})});
    MockEmbeddingProvider provider(8, 1);
    auto index = build_index(bank, provider, true);

    testutil::TempDir tmp;
    const auto path = tmp.file("index.jsonl");
    save_index(index, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 2);

    auto loaded = load_index(path);
    CHECK(loaded.per_session[0].turn_vectors == loaded.per_session[1].turn_vectors);
}

TEST_CASE("load_index refuses the wrong fingerprint") {
    testutil::TempDir tmp;
    auto bank = construct_bank({testutil::make_session("s0", {{"a", "x"}})});
    MockEmbeddingProvider provider(8, 1);
    auto index = build_index(bank, provider, true);
    const auto path = tmp.file("index.jsonl");
    save_index(index, path);

    CHECK_THROWS_WITH_AS(load_index(path, std::string("other|normalize=1")),
                         doctest::Contains("rebuild the index"), LoadError);
    CHECK_NOTHROW(load_index(path, index.provider_fingerprint));
    CHECK_NOTHROW(load_index(path));
}

TEST_CASE("load_index rejects missing and malformed files") {
    testutil::TempDir tmp;
    CHECK_THROWS_AS(load_index(tmp.file("absent.jsonl")), LoadError);

    const auto garbled = tmp.file("garbled.jsonl");
    testutil::write_file(garbled, "{\"type\": \"something else\"}\n");
    CHECK_THROWS_WITH_AS(load_index(garbled), doctest::Contains("header"), LoadError);

    const auto truncated = tmp.file("truncated.jsonl");
    testutil::write_file(truncated,
                         "{\"type\":\"index_header\",\"version\":1,\"fingerprint\":\"f\","
                         "\"dim\":2,\"normalized\":true,\"sessions\":"
                         "[{\"session_id\":\"s0\",\"turn_texts\":[\"a: x\"]}]}\n");
    CHECK_THROWS_WITH_AS(load_index(truncated), doctest::Contains("missing the vector"),
                         LoadError);
}

} // TEST_SUITE("tir")
