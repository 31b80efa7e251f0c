#include <doctest.h>

#include <cmath>
#include <set>

#include <json.hpp>

#include "oracles.hpp"
#include "osmt/errors.hpp"
#include "osmt/gallery.hpp"
#include "osmt/rng.hpp"

using namespace osmt;

namespace {

SystemConfig small_config(int d, int k, double th_emb, std::int64_t ttl = 1000) {
    SystemConfig cfg;
    cfg.d = d;
    cfg.buffer_capacity = k;
    cfg.th_emb = th_emb;
    cfg.ttl_ms = ttl;
    return cfg;
}

IdentityRecord record_with(std::vector<std::pair<Embedding, std::int64_t>> slots) {
    IdentityRecord rec;
    for (auto& [emb, ts] : slots) rec.slots.push_back(BufferSlot{std::move(emb), ts});
    return rec;
}

}  // namespace

TEST_SUITE("gallery") {

TEST_CASE("centroid of a single slot is that slot") {
    auto rec = record_with({{{1.0, 3.0}, 0}});
    CHECK(centroid(rec) == Embedding{1.0, 3.0});
}

TEST_CASE("centroid is the arithmetic mean") {
    auto rec = record_with({{{1.0, 1.0}, 0}, {{3.0, 3.0}, 1}});
    CHECK(centroid(rec) == Embedding{2.0, 2.0});
}

TEST_CASE("partial buffer centroid divides by occupied count") {
    Rng rng(11);
    // K=4 but only 3 occupied
    std::vector<oracle::TimedEmbedding> slots;
    IdentityRecord rec;
    for (int i = 0; i < 3; ++i) {
        Embedding e = rng.gaussian_vector(8, 2.0);
        slots.push_back(oracle::TimedEmbedding{e, i});
        rec.slots.push_back(BufferSlot{e, i});
    }
    Embedding expected = oracle::scalar_centroid(slots);
    Embedding got = centroid(rec);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("query on an empty gallery") {
    OpenSetGallery g(validate_config(small_config(2, 4, 2.0)));
    auto r = g.query({1.0, 1.0});
    CHECK(r.kind == RetrievalResult::Kind::GalleryEmpty);
}

TEST_CASE("query matches and rejects against two identities") {
    OpenSetGallery g(validate_config(small_config(2, 4, 2.0)));
    CHECK(g.observe({0.0, 1.0}, 0).global_id == 0);
    CHECK(g.observe({10.0, 0.0}, 1).global_id == 1);

    auto matched = g.query({1.0, 1.0});
    CHECK(matched.kind == RetrievalResult::Kind::Matched);
    CHECK(matched.global_id == 0);
    CHECK(matched.distance == 1.0);

    // min over {sqrt(41), sqrt(50)} = sqrt(41), above th_emb
    auto rejected = g.query({5.0, 5.0});
    CHECK(rejected.kind == RetrievalResult::Kind::RejectedAsNew);
    CHECK(rejected.distance == std::sqrt(41.0));
    CHECK(rejected.distance == doctest::Approx(6.4031242374328485).epsilon(1e-12));
}

TEST_CASE("query is a pure read") {
    OpenSetGallery g(validate_config(small_config(2, 4, 2.0)));
    g.observe({0.0, 0.0}, 0);
    std::string before = g.snapshot();
    g.query({0.5, 0.0});
    g.query({50.0, 0.0});
    CHECK(g.snapshot() == before);
}

TEST_CASE("equidistant tie goes to the lowest global id") {
    // Two identities with identical centroids can only come from a snapshot.
    nlohmann::json doc;
    doc["format"] = "osmt-gallery";
    doc["version"] = 1;
    doc["config"] = {{"d", 2}, {"k", 4}, {"th_emb", 5.0}, {"ttl_ms", 1000}};
    doc["next_global_id"] = 2;
    doc["identities"] = nlohmann::json::array();
    for (int gid = 0; gid < 2; ++gid) {
        doc["identities"].push_back(
            {{"global_id", gid},
             {"created_at_ms", 0},
             {"last_matched_at_ms", 0},
             {"slots", {{{"embedding", {2.0, 2.0}}, {"inserted_at_ms", 0}}}}});
    }
    OpenSetGallery g = OpenSetGallery::restore(doc.dump());
    auto r = g.query({2.0, 5.0});
    CHECK(r.kind == RetrievalResult::Kind::Matched);
    CHECK(r.global_id == 0);
    CHECK(r.distance == 3.0);
}

TEST_CASE("query rejects dimension mismatch") {
    OpenSetGallery g(validate_config(small_config(4, 2, 1.0)));
    CHECK_THROWS_AS(g.query({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("first observe admits identity 0 with one slot") {
    OpenSetGallery g(validate_config(small_config(2, 4, 2.0)));
    auto a = g.observe({7.0, 7.0}, 42);
    CHECK(a.kind == Assignment::Kind::NewIdentity);
    CHECK(a.global_id == 0);
    REQUIRE(g.size() == 1);
    CHECK(g.identities()[0].slots.size() == 1);
    CHECK(g.identities()[0].created_at_ms == 42);
}

TEST_CASE("circular buffer keeps the newest K on match") {
    OpenSetGallery g(validate_config(small_config(1, 2, 10.0)));
    g.observe({1.0}, 0);
    g.observe({2.0}, 1);  // matches, buffer now {1,2}
    auto a = g.observe({3.0}, 2);
    CHECK(a.kind == Assignment::Kind::MatchedAndStored);
    const auto& slots = g.identities()[0].slots;
    REQUIRE(slots.size() == 2);
    CHECK(slots[0].embedding == Embedding{2.0});
    CHECK(slots[1].embedding == Embedding{3.0});
    CHECK(g.identities()[0].last_matched_at_ms == 2);
}

TEST_CASE("observe replay equals the from-scratch oracle") {
    SystemConfig cfg = small_config(8, 3, 6.0);
    OpenSetGallery g(validate_config(cfg));
    oracle::NaiveGallery naive;
    naive.d = cfg.d;
    naive.k = cfg.buffer_capacity;
    naive.th_emb = cfg.th_emb;
    naive.ttl_ms = cfg.ttl_ms;

    Rng rng(513);
    std::vector<Embedding> latents;
    for (int i = 0; i < 5; ++i) latents.push_back(rng.gaussian_vector(8, 10.0));

    for (int step = 0; step < 100; ++step) {
        const Embedding& latent = latents[rng.uniform_int(0, latents.size() - 1)];
        Embedding probe = rng.gaussian_vector(8, 1.0);
        for (std::size_t i = 0; i < probe.size(); ++i) probe[i] += latent[i];

        auto got = g.observe(probe, step);
        auto want = naive.observe(probe, step);
        CHECK(got.global_id == want.gid);
        CHECK((got.kind == Assignment::Kind::MatchedAndStored) == want.matched);
        CHECK(got.distance.has_value() == want.has_distance);
        if (want.has_distance) {
            CHECK(*got.distance == doctest::Approx(want.distance).epsilon(1e-9));
        }
        for (const auto& rec : g.identities()) {
            CHECK(rec.slots.size() <= 3);  // buffer bound after every mutation
        }
    }
}

TEST_CASE("expire is a no-op on fresh slots") {
    OpenSetGallery g(validate_config(small_config(1, 2, 10.0, 500)));
    g.observe({1.0}, 0);
    auto report = g.expire(400);
    CHECK(report.slots_removed == 0);
    CHECK(report.identities_pruned.empty());
    CHECK(g.size() == 1);
}

TEST_CASE("expire prunes an identity aged ttl+1 and keeps one at exactly ttl") {
    OpenSetGallery g(validate_config(small_config(1, 2, 10.0, 500)));
    g.observe({1.0}, 0);
    auto keep = g.expire(500);  // age exactly ttl: retained
    CHECK(keep.slots_removed == 0);
    CHECK(g.size() == 1);
    auto drop = g.expire(501);  // age ttl+1: pruned
    CHECK(drop.slots_removed == 1);
    REQUIRE(drop.identities_pruned.size() == 1);
    CHECK(drop.identities_pruned[0] == 0);
    CHECK(g.size() == 0);
}

TEST_CASE("expire is idempotent at the same now") {
    OpenSetGallery g(validate_config(small_config(1, 4, 10.0, 100)));
    g.observe({1.0}, 0);
    g.observe({1.5}, 50);
    g.observe({2.0}, 200);
    auto first = g.expire(250);
    CHECK(first.slots_removed > 0);
    std::string state = g.snapshot();
    auto second = g.expire(250);
    CHECK(second.slots_removed == 0);
    CHECK(second.identities_pruned.empty());
    CHECK(g.snapshot() == state);
}

TEST_CASE("pruned ids are never reused") {
    OpenSetGallery g(validate_config(small_config(1, 2, 0.5, 100)));
    CHECK(g.observe({0.0}, 0).global_id == 0);
    g.expire(1000);
    CHECK(g.size() == 0);
    CHECK(g.observe({0.0}, 1000).global_id == 1);
}

TEST_CASE("calibrate_th_emb on the 6-8-10 pair") {
    std::vector<std::pair<std::string, Embedding>> labeled = {
        {"a", {0.0, 0.0}},
        {"b", {6.0, 8.0}},
    };
    CHECK(calibrate_th_emb(labeled) == 10.0);
}

TEST_CASE("calibrate_th_emb equals the all-pairs oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<std::string, Embedding>> labeled;
        int classes = static_cast<int>(rng.uniform_int(2, 5));
        for (int c = 0; c < classes; ++c) {
            int members = static_cast<int>(rng.uniform_int(1, 4));
            for (int m = 0; m < members; ++m) {
                labeled.emplace_back("class" + std::to_string(c),
                                     rng.gaussian_vector(4, 5.0));
            }
        }
        CHECK(calibrate_th_emb(labeled) == oracle::all_pairs_calibration(labeled));
    }
}

TEST_CASE("calibrate_th_emb needs two classes") {
    std::vector<std::pair<std::string, Embedding>> labeled = {
        {"solo", {1.0}},
        {"solo", {2.0}},
    };
    CHECK_THROWS_AS(calibrate_th_emb(labeled), std::invalid_argument);
}

TEST_CASE("snapshot round-trips an empty gallery with its counter") {
    OpenSetGallery g(validate_config(small_config(1, 2, 0.5, 100)));
    g.observe({0.0}, 0);
    g.expire(1000);  // counter now 1, gallery empty
    REQUIRE(g.size() == 0);
    OpenSetGallery back = OpenSetGallery::restore(g.snapshot());
    CHECK(back.size() == 0);
    CHECK(back.next_global_id() == 1);
    CHECK(back.observe({0.0}, 2000).global_id == 1);
}

TEST_CASE("snapshot of the same state is byte-identical") {
    OpenSetGallery g(validate_config(small_config(3, 2, 4.0)));
    Rng rng(5);
    for (int i = 0; i < 20; ++i) g.observe(rng.gaussian_vector(3, 3.0), i);
    CHECK(g.snapshot() == g.snapshot());
}

TEST_CASE("restore resumes exactly where the run left off") {
    SystemConfig cfg = small_config(4, 3, 5.0);
    Rng rng(31);
    std::vector<Embedding> probes;
    for (int i = 0; i < 100; ++i) probes.push_back(rng.gaussian_vector(4, 4.0));

    OpenSetGallery uninterrupted(validate_config(cfg));
    std::vector<Assignment> direct;
    for (int i = 0; i < 100; ++i) direct.push_back(uninterrupted.observe(probes[i], i));

    OpenSetGallery first_half(validate_config(cfg));
    for (int i = 0; i < 50; ++i) first_half.observe(probes[i], i);
    OpenSetGallery resumed = OpenSetGallery::restore(first_half.snapshot());
    for (int i = 50; i < 100; ++i) {
        Assignment a = resumed.observe(probes[i], i);
        CHECK(a.kind == direct[i].kind);
        CHECK(a.global_id == direct[i].global_id);
        CHECK(a.distance == direct[i].distance);
    }
    CHECK(resumed.snapshot() == uninterrupted.snapshot());
}

TEST_CASE("restore rejects malformed snapshots") {
    CHECK_THROWS_AS(OpenSetGallery::restore("not json at all"), DataError);
    CHECK_THROWS_AS(OpenSetGallery::restore("{\"format\":\"other\"}"), DataError);

    OpenSetGallery g(validate_config(small_config(2, 2, 1.0)));
    g.observe({1.0, 2.0}, 0);
    std::string snap = g.snapshot();

    // dimension mismatch inside a slot
    auto doc = nlohmann::json::parse(snap);
    doc["identities"][0]["slots"][0]["embedding"] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(OpenSetGallery::restore(doc.dump()), DataError);

    // counter colliding with a live identity
    doc = nlohmann::json::parse(snap);
    doc["next_global_id"] = 0;
    CHECK_THROWS_AS(OpenSetGallery::restore(doc.dump()), DataError);
}

TEST_CASE("observe conservation and monotone counter") {
    OpenSetGallery g(validate_config(small_config(2, 2, 3.0, 50)));
    Rng rng(417);
    std::size_t new_count = 0;
    std::set<std::uint64_t> created;
    std::uint64_t last_created = 0;
    for (int i = 0; i < 300; ++i) {
        Embedding probe = rng.gaussian_vector(2, 6.0);
        auto a = g.observe(probe, i * 10);
        if (a.kind == Assignment::Kind::NewIdentity) {
            ++new_count;
            if (!created.empty()) CHECK(a.global_id > last_created);
            last_created = a.global_id;
            CHECK(created.insert(a.global_id).second);  // never reused
        }
        if (i % 7 == 0) g.expire(i * 10);
    }
    CHECK(new_count == created.size());
    CHECK(g.next_global_id() == created.size());
}

TEST_CASE("raising th_emb never increases NewIdentity count on a fixed stream") {
    Rng rng(2024);
    std::vector<Embedding> latents;
    for (int i = 0; i < 4; ++i) latents.push_back(rng.gaussian_vector(4, 8.0));
    std::vector<Embedding> probes;
    for (int i = 0; i < 200; ++i) {
        Embedding p = rng.gaussian_vector(4, 1.0);
        const Embedding& latent = latents[rng.uniform_int(0, latents.size() - 1)];
        for (std::size_t k = 0; k < p.size(); ++k) p[k] += latent[k];
        probes.push_back(std::move(p));
    }
    std::size_t previous = probes.size() + 1;
    for (double th : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        OpenSetGallery g(validate_config(small_config(4, 3, th)));
        std::size_t news = 0;
        for (std::size_t i = 0; i < probes.size(); ++i) {
            if (g.observe(probes[i], static_cast<std::int64_t>(i)).kind ==
                Assignment::Kind::NewIdentity) {
                ++news;
            }
        }
        CHECK(news <= previous);
        previous = news;
    }
}

}  // TEST_SUITE
