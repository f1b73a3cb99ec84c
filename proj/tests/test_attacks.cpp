#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "tdetect/attacks.hpp"
#include "tdetect/error.hpp"
#include "tdetect/utf8.hpp"

using namespace tdetect;

namespace {

const std::string kSample =
    "The old lighthouse keeper counted 42 ships. A storm rolled in from the north! "
    "He lit the lamp at 7 and watched the harbour until the tide turned.";

std::string read_data(const std::string& name) {
  std::ifstream in(std::string(TDETECT_SOURCE_DIR) + "/data/" + name, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string strip(std::u32string s, char32_t c) {
  std::erase(s, c);
  return utf8::encode(s);
}

std::size_t count_eligible(AttackKind kind, const std::string& text) {
  return apply_attack(text, {kind, 0.0, 0}).eligible_sites;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_SUITE("attacks") {
  TEST_CASE("examples") {
    CHECK(apply_attack("ab", {AttackKind::zero_width_space, 1.0, 0}).text == "a\u200Bb");
    CHECK(apply_attack("the cat", {AttackKind::article_deletion, 1.0, 0}).text == "cat");
    CHECK(apply_attack("HELLO world 42", {AttackKind::number, 1.0, 2}).text == "HELLO world 53");
    CHECK(apply_attack("HELLO world 42", {AttackKind::number, 1.0, 3}).text == "HELLO world 31");
    CHECK(apply_attack("Ab c", {AttackKind::case_flip, 1.0, 0}).text == "aB C");
    CHECK(apply_attack("a b", {AttackKind::whitespace, 1.0, 0}).text == "a  b");
    CHECK(apply_attack("Stop. Go now", {AttackKind::insert_paragraphs, 1.0, 0}).text == "Stop.\n\nGo now");
    CHECK(apply_attack("the color", {AttackKind::alternative_spelling, 1.0, 0}).text == "the colour");
    CHECK(apply_attack("Colour", {AttackKind::alternative_spelling, 1.0, 0}).text == "Color");
    CHECK(apply_attack("sat on a", {AttackKind::article_deletion, 1.0, 0}).text == "sat on");
  }

  TEST_CASE("names round trip") {
    for (auto k : kAllAttacks) CHECK(parse_attack_kind(to_string(k)) == k);
    CHECK_FALSE(parse_attack_kind("paraphrase").has_value());
    CHECK_FALSE(parse_attack_kind("").has_value());
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(apply_attack("", {AttackKind::homoglyph, 0.5, 0}), Error);
    CHECK_THROWS_AS(apply_attack("x", {AttackKind::homoglyph, 1.5, 0}), Error);
    CHECK_THROWS_AS(apply_attack("x", {AttackKind::homoglyph, -0.1, 0}), Error);
    CHECK_THROWS_AS(apply_attack("x", {AttackKind::homoglyph, std::nan(""), 0}), Error);
    CHECK_THROWS_AS(apply_attack("\xff", {AttackKind::homoglyph, 0.5, 0}), utf8::DecodeError);
  }

  TEST_CASE("no eligible sites is a flagged no-op") {
    const auto r = apply_attack("hello world", {AttackKind::number, 1.0, 0});
    CHECK(r.noop);
    CHECK(r.text == "hello world");
    CHECK(r.eligible_sites == 0);
    CHECK_FALSE(apply_attack("h1", {AttackKind::number, 1.0, 0}).noop);
  }

  TEST_CASE("exactly round(intensity * eligible) sites, deterministic, identity at zero") {
    for (auto kind : kAllAttacks) {
      CAPTURE(to_string(kind));
      const std::size_t n = count_eligible(kind, kSample);
      CHECK(n > 0);
      for (double intensity : {0.0, 0.1, 0.25, 0.5, 0.9, 1.0}) {
        const AttackSpec spec{kind, intensity, 99};
        const auto a = apply_attack(kSample, spec);
        CHECK(a.eligible_sites == n);
        CHECK(a.perturbed_sites == static_cast<std::size_t>(std::llround(intensity * double(n))));
        CHECK(apply_attack(kSample, spec).text == a.text);
        if (intensity == 0.0) CHECK(a.text == kSample);
        if (intensity == 1.0) CHECK(a.text != kSample);
        CHECK(utf8::is_valid(a.text));
      }
    }
  }

  TEST_CASE("seed changes the chosen sites") {
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      seen.insert(apply_attack(kSample, {AttackKind::zero_width_space, 0.2, seed}).text);
    }
    CHECK(seen.size() > 1);
  }

  TEST_CASE("zero-width insertions are the only change") {
    for (double intensity : {0.3, 1.0}) {
      const auto r = apply_attack(kSample, {AttackKind::zero_width_space, intensity, 5});
      CHECK(strip(utf8::decode(r.text), 0x200B) == kSample);
    }
  }

  TEST_CASE("homoglyphs come from the table file and map back to the original letter") {
    std::map<char32_t, char32_t> back;
    std::istringstream in(read_data("confusables.tsv"));
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      const auto src = utf8::decode(line.substr(0, tab));
      const auto dst = utf8::decode(line.substr(tab + 1));
      REQUIRE(src.size() == 1);
      REQUIRE(dst.size() == 1);
      CHECK(back.emplace(dst[0], src[0]).second);
      CHECK(ConfusablesTable::builtin().fold(dst[0]) == src[0]);
    }
    CHECK(ConfusablesTable::builtin().size() == back.size());

    const auto original = utf8::decode(kSample);
    const auto attacked = utf8::decode(apply_attack(kSample, {AttackKind::homoglyph, 1.0, 1}).text);
    REQUIRE(attacked.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
      if (attacked[i] == original[i]) {
        CHECK(ConfusablesTable::builtin().look_alikes(original[i]) == nullptr);
      } else {
        REQUIRE(back.count(attacked[i]) == 1);
        CHECK(back.at(attacked[i]) == original[i]);
      }
    }
  }

  TEST_CASE("table parsing rejects malformed rows") {
    CHECK_THROWS_AS(ConfusablesTable::parse("ab\t\u0430\n"), Error);
    CHECK_THROWS_AS(ConfusablesTable::parse("a\tb\n"), Error);
    CHECK_THROWS_AS(ConfusablesTable::parse("a\t\u0430\nb\t\u0430\n"), Error);
    CHECK(ConfusablesTable::parse("# c\na\t\u0430\n").size() == 1);
  }

  TEST_CASE("case flip and number shift are involutions at full intensity") {
    const auto once = apply_attack(kSample, {AttackKind::case_flip, 1.0, 0}).text;
    CHECK(apply_attack(once, {AttackKind::case_flip, 1.0, 0}).text == kSample);
    const auto up = apply_attack(kSample, {AttackKind::number, 1.0, 4}).text;
    CHECK(up.find("53") != std::string::npos);
    CHECK(apply_attack(up, {AttackKind::number, 1.0, 5}).text == kSample);
  }

  TEST_CASE("misspelling swaps interior letters only") {
    const auto a = words(kSample);
    const auto b = words(apply_attack(kSample, {AttackKind::misspelling, 1.0, 3}).text);
    REQUIRE(a.size() == b.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].size() == b[i].size());
      if (a[i] == b[i]) continue;
      ++changed;
      CHECK(a[i].front() == b[i].front());
      CHECK(a[i].back() == b[i].back());
      auto sa = a[i], sb = b[i];
      std::sort(sa.begin(), sa.end());
      std::sort(sb.begin(), sb.end());
      CHECK(sa == sb);
    }
    CHECK(changed > 0);
  }

  TEST_CASE("article deletion removes only articles") {
    const auto r = apply_attack(kSample, {AttackKind::article_deletion, 1.0, 0}).text;
    std::vector<std::string> kept;
    for (const auto& w : words(kSample)) {
      const auto l = lower(w);
      if (l != "a" && l != "an" && l != "the") kept.push_back(w);
    }
    CHECK(words(r) == kept);
    CHECK(r.find("  ") == std::string::npos);
  }

  TEST_CASE("synonyms come from the thesaurus") {
    const std::string text = "The big dog ran fast past the small house.";
    const auto a = words(text);
    const auto b = words(apply_attack(text, {AttackKind::synonym, 1.0, 0}).text);
    REQUIRE(a.size() == b.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == b[i]) continue;
      ++changed;
      std::string key = lower(a[i]);
      while (!key.empty() && std::ispunct(static_cast<unsigned char>(key.back()))) key.pop_back();
      const auto* options = WordTable::thesaurus().lookup(key);
      REQUIRE(options != nullptr);
      std::string got = lower(b[i]);
      while (!got.empty() && std::ispunct(static_cast<unsigned char>(got.back()))) got.pop_back();
      CHECK(std::find(options->begin(), options->end(), got) != options->end());
    }
    CHECK(changed >= 2);
  }
}

TEST_SUITE("defense") {
  TEST_CASE("examples") {
    CHECK(normalize_defense("p\u0430ssword") == "password");
    CHECK(normalize_defense("a\u200Bb\u200Dc\uFEFF") == "abc");
    CHECK(normalize_defense("\uFF26\uFF55\uFF4C\uFF4C width") == "Full width");
    CHECK(normalize_defense("\uFB01ne \uFB02ow") == "fine flow");
    CHECK(normalize_defense("a  \t\n\nb") == "a b");
    CHECK(normalize_defense("Case Kept") == "Case Kept");
    CHECK(normalize_defense("\U0001D400\U0001D41A\U0001D7CF") == "Aa1");
    CHECK(normalize_defense("") == "");
    CHECK_THROWS_AS(normalize_defense("ok\xc3"), utf8::DecodeError);
  }

  TEST_CASE("undoes character-level attacks on single-spaced ASCII") {
    for (auto kind : {AttackKind::zero_width_space, AttackKind::homoglyph, AttackKind::whitespace}) {
      for (std::uint64_t seed : {0u, 1u, 2u}) {
        const auto r = apply_attack(kSample, {kind, 0.7, seed}).text;
        CHECK(normalize_defense(r) == kSample);
      }
    }
  }

  TEST_CASE("idempotent on random mixed input") {
    const std::vector<char32_t> alphabet = {U'a', U'B', U' ', U'\t', U'\n', 0x200B, 0x0430, 0x03B1, 0xFF21,
                                            0xFB03, 0x1D41A, 0x00E9, 0x4E2D, 0x1F600, U'7', U'.'};
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 40);
    for (int i = 0; i < 500; ++i) {
      std::u32string s;
      for (std::size_t k = len(rng); k > 0; --k) s.push_back(alphabet[pick(rng)]);
      const auto once = normalize_defense(utf8::encode(s));
      CHECK(normalize_defense(once) == once);
      CHECK(once.find("  ") == std::string::npos);
    }
  }
}
