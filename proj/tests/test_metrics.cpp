#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "jointqa/metrics.hpp"

using namespace jointqa;

namespace {

std::string join(const std::vector<std::string>& toks) {
  std::string out;
  for (const auto& t : toks) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> pool = {"harbor", "kite",  "tide",   "lamp", "granite",
                                                "blue",   "seven", "north",  "mill", "quay",
                                                "fog",    "bell",  "anchor", "moss", "drift"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::string> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(pool[pick(rng)]);
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("normalization lowercases, strips ASCII punctuation and articles") {
    CHECK(normalize_text("The  Lighthouse, at Skagen!") == "lighthouse at skagen");
    CHECK(normalize_text("An Apple a Day") == "apple day");
    CHECK(normalize_text("self-taught") == "selftaught");  // no space injected
    CHECK(normalize_text("Tromsø Å") == "tromsø å");       // non-ASCII letters stay
    CHECK(normalize_text("caf\xC3\xA9\xE2\x80\x94"
                         "bar") ==
          "caf\xC3\xA9\xE2\x80\x94"
          "bar");  // non-ASCII punctuation survives
    CHECK(normalize_text("the a an") == "");
    CHECK(normalize_text("   spaced\tout\nwords  ") == "spaced out words");
  }

  TEST_CASE("normalization is idempotent") {
    std::vector<std::string> samples = {"The  Lighthouse, at Skagen!",
                                        "An Apple a Day",
                                        "self-taught",
                                        "Tromsø Å",
                                        "",
                                        "the",
                                        "7.5% of \"quoted\" text's value"};
    std::mt19937_64 rng(19);
    std::uniform_int_distribution<std::size_t> len(0, 6);
    for (int rep = 0; rep < 40; ++rep) samples.push_back(join(random_tokens(rng, len(rng))));
    for (const auto& s : samples) {
      std::string once = normalize_text(s);
      CHECK(normalize_text(once) == once);
    }
  }

  TEST_CASE("token overlap hits the four-of-five boundary") {
    // prediction carries one extra leading token: precision 4/5, recall 4/4
    PairScore s = f1_em("that spring tides flooded quickly", "spring tides flooded quickly");
    CHECK(std::abs(s.f1 - 8.0 / 9.0) < 1e-12);
    CHECK(s.em == 0.0);
  }

  TEST_CASE("exact matches modulo normalization score one") {
    PairScore s = f1_em("S\xC3\xB8ren \xC3\x85ngstr\xC3\xB6m!", "s\xC3\xB8ren \xC3\xA5ngstr\xC3\xB6m");
    CHECK(s.f1 == 1.0);
    CHECK(s.em == 1.0);
  }

  TEST_CASE("pair scoring covers the empty and disjoint corners") {
    CHECK(f1_em("granite quay", "fog bell").f1 == 0.0);
    CHECK(f1_em("granite quay", "fog bell").em == 0.0);
    CHECK(f1_em("", "fog bell").f1 == 0.0);
    CHECK(f1_em("fog bell", "").f1 == 0.0);
    CHECK(f1_em("", "").f1 == 1.0);
    CHECK(f1_em("", "").em == 1.0);
    // normalization can empty a string entirely
    CHECK(f1_em("the", "").em == 1.0);
    CHECK(f1_em("the", "").f1 == 1.0);
  }

  TEST_CASE("overlap counts tokens as a multiset") {
    PairScore s = f1_em("kite kite", "kite");
    CHECK(std::abs(s.f1 - 2.0 / 3.0) < 1e-12);  // precision 1/2, recall 1
    CHECK(s.em == 0.0);
  }

  TEST_CASE("exact match implies a perfect overlap score") {
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> len(1, 6);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    int exact_seen = 0;
    for (int rep = 0; rep < 1000; ++rep) {
      std::string gold = join(random_tokens(rng, len(rng)));
      std::string pred = coin(rng) < 0.4 ? "The " + gold + "!" : join(random_tokens(rng, len(rng)));
      PairScore s = f1_em(pred, gold);
      if (s.em == 1.0) {
        ++exact_seen;
        CHECK(s.f1 == 1.0);
      }
    }
    CHECK(exact_seen > 100);  // the property must actually trigger
  }

  TEST_CASE("single-reference overlap is symmetric") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> len(0, 5);
    for (int rep = 0; rep < 300; ++rep) {
      std::string a = join(random_tokens(rng, len(rng)));
      std::string b = join(random_tokens(rng, len(rng)));
      CHECK(f1_em(a, b).f1 == doctest::Approx(f1_em(b, a).f1).epsilon(1e-15));
    }
  }

  TEST_CASE("multi-reference scoring keeps the best score per metric") {
    PairScore s = best_f1_em("red kite flies", {"red kite", "kite"});
    CHECK(std::abs(s.f1 - 0.8) < 1e-12);
    CHECK(s.em == 0.0);
    PairScore hit = best_f1_em("kite", {"red kite", "kite"});
    CHECK(hit.f1 == 1.0);
    CHECK(hit.em == 1.0);
    // no references means the no-answer reference ""
    CHECK(best_f1_em("", {}).em == 1.0);
    CHECK(best_f1_em("kite", {}).f1 == 0.0);
  }

  TEST_CASE("answerability agreement is a percentage over parallel flags") {
    CHECK(avna({true, false}, {true, false}) == 100.0);
    CHECK(avna({true, false}, {false, true}) == 0.0);
    CHECK(avna({true, true, false, false}, {true, true, false, true}) == 75.0);
    CHECK_THROWS_AS(avna({true}, {true, false}), std::invalid_argument);
    CHECK_THROWS_AS(avna({}, {}), std::invalid_argument);
  }

  TEST_CASE("aggregate evaluation scores a perfect run at one hundred") {
    std::map<std::string, std::vector<std::string>> golds = {
        {"q1", {"granite quay"}}, {"q2", {"fog bell", "bell"}}, {"q3", {}}};
    std::map<std::string, std::string> preds = {
        {"q1", "granite quay"}, {"q2", "bell"}, {"q3", ""}};
    EvalReport r = evaluate(preds, golds);
    CHECK(r.f1 == 100.0);
    CHECK(r.em == 100.0);
    CHECK(r.avna == 100.0);
    CHECK(r.total == 3);
  }

  TEST_CASE("an all-empty run scores exactly the unanswerable fraction") {
    std::map<std::string, std::vector<std::string>> golds = {{"q1", {"tide gate"}},
                                                             {"q2", {"mill"}},
                                                             {"q3", {}},
                                                             {"q4", {"north quay"}},
                                                             {"q5", {}}};
    std::map<std::string, std::string> preds;
    for (const auto& [id, _] : golds) preds[id] = "";
    EvalReport r = evaluate(preds, golds);
    CHECK(r.f1 == 40.0);
    CHECK(r.em == 40.0);
    CHECK(r.avna == 40.0);
  }

  TEST_CASE("evaluation lists every missing prediction id") {
    std::map<std::string, std::vector<std::string>> golds = {
        {"qa", {"kite"}}, {"qb", {}}, {"qc", {"moss"}}};
    std::map<std::string, std::string> preds = {{"qa", "kite"}};
    try {
      evaluate(preds, golds);
      FAIL("expected an error for missing ids");
    } catch (const std::runtime_error& e) {
      std::string msg = e.what();
      CHECK(msg.find("qb") != std::string::npos);
      CHECK(msg.find("qc") != std::string::npos);
      CHECK(msg.find("qa") == std::string::npos);
    }
    CHECK_THROWS_AS(evaluate({}, {}), std::runtime_error);
  }

  TEST_CASE("evaluation ignores prediction order and extra ids") {
    std::map<std::string, std::vector<std::string>> golds = {
        {"q1", {"anchor"}}, {"q2", {}}, {"q3", {"drift moss"}}};
    std::map<std::string, std::string> a = {
        {"q1", "anchor"}, {"q2", "bell"}, {"q3", "moss"}};
    std::map<std::string, std::string> b;
    b.emplace("q3", "moss");
    b.emplace("q1", "anchor");
    b.emplace("q2", "bell");
    b.emplace("zz-extra", "ignored");
    EvalReport ra = evaluate(a, golds);
    EvalReport rb = evaluate(b, golds);
    CHECK(ra.f1 == rb.f1);
    CHECK(ra.em == rb.em);
    CHECK(ra.avna == rb.avna);
    CHECK(ra.total == rb.total);
  }

  TEST_CASE("evaluation can emit per-example scores") {
    std::map<std::string, std::vector<std::string>> golds = {{"q1", {"anchor"}}, {"q2", {}}};
    std::map<std::string, std::string> preds = {{"q1", "anchor"}, {"q2", "bell"}};
    std::vector<ExampleScore> rows;
    EvalReport r = evaluate(preds, golds, &rows);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].id == "q1");
    CHECK(rows[0].f1 == 1.0);
    CHECK(rows[0].em == 1.0);
    CHECK(rows[0].avna_match);
    CHECK(rows[1].id == "q2");
    CHECK(rows[1].f1 == 0.0);
    CHECK(rows[1].em == 0.0);
    CHECK_FALSE(rows[1].avna_match);
    CHECK(r.avna == 50.0);
  }
}
