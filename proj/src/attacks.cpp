#include "tdetect/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tdetect/error.hpp"
#include "tdetect/random.hpp"
#include "tdetect/resources.hpp"
#include "tdetect/utf8.hpp"

namespace tdetect {

namespace {

constexpr char32_t kZeroWidthSpace = 0x200B;

std::vector<std::pair<std::string, std::string>> tsv_rows(std::string_view tsv) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::istringstream in{std::string(tsv)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "table line " + std::to_string(line_no) + " is not source<TAB>target");
    }
    rows.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return rows;
}

std::string lowercase_ascii(std::string_view word) {
  std::string out(word);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Copies the case pattern of `original` onto `replacement`.
std::string match_case(std::string_view original, std::string_view replacement) {
  std::string out(replacement);
  const bool all_upper =
      original.size() > 1 &&
      std::all_of(original.begin(), original.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
  if (all_upper) {
    for (char& c : out) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
  } else if (!original.empty() && original[0] >= 'A' && original[0] <= 'Z' && !out.empty() &&
             out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

/// Picks exactly round(intensity * n) of n sites.
std::vector<bool> choose_sites(std::size_t n, double intensity, Rng& rng) {
  std::vector<bool> chosen(n, false);
  const auto k = static_cast<std::size_t>(std::llround(intensity * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
    std::swap(order[i], order[j]);
    chosen[order[i]] = true;
  }
  return chosen;
}

struct WordSpan {
  std::size_t begin;
  std::size_t end;
};

std::vector<WordSpan> ascii_words(std::u32string_view cps) {
  std::vector<WordSpan> words;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!utf8::is_ascii_letter(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && utf8::is_ascii_letter(cps[j])) ++j;
    words.push_back({i, j});
    i = j;
  }
  return words;
}

std::string ascii_of(std::u32string_view cps, WordSpan w) {
  std::string out;
  for (std::size_t i = w.begin; i < w.end; ++i) out.push_back(static_cast<char>(cps[i]));
  return out;
}

// Applies per-site replacements: sites are [begin, end) code point ranges,
// sorted and non-overlapping.
struct Edit {
  std::size_t begin;
  std::size_t end;
  std::u32string replacement;
};

std::u32string apply_edits(std::u32string_view cps, const std::vector<Edit>& edits) {
  std::u32string out;
  out.reserve(cps.size() + edits.size());
  std::size_t pos = 0;
  for (const Edit& e : edits) {
    out.append(cps.substr(pos, e.begin - pos));
    out += e.replacement;
    pos = e.end;
  }
  out.append(cps.substr(pos));
  return out;
}

std::u32string widen(std::string_view ascii) { return {ascii.begin(), ascii.end()}; }

bool is_format_char(char32_t c) {
  return c == 0x00AD || c == 0x180E || c == 0xFEFF || (c >= 0x200B && c <= 0x200F) ||
         (c >= 0x202A && c <= 0x202E) || (c >= 0x2060 && c <= 0x2064);
}

// Compatibility folds for fullwidth forms, Latin ligatures and the
// mathematical alphanumeric letters and digits.
std::optional<std::u32string> compat_fold(char32_t c) {
  if (c >= 0xFF01 && c <= 0xFF5E) return std::u32string(1, c - 0xFEE0);
  switch (c) {
    case 0xFB00: return U"ff";
    case 0xFB01: return U"fi";
    case 0xFB02: return U"fl";
    case 0xFB03: return U"ffi";
    case 0xFB04: return U"ffl";
    case 0xFB05: return U"st";
    case 0xFB06: return U"st";
    default: break;
  }
  if (c >= 0x1D400 && c <= 0x1D6A3) {
    const char32_t k = (c - 0x1D400) % 52;
    return std::u32string(1, k < 26 ? U'A' + k : U'a' + (k - 26));
  }
  if (c >= 0x1D7CE && c <= 0x1D7FF) return std::u32string(1, U'0' + (c - 0x1D7CE) % 10);
  return std::nullopt;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::zero_width_space: return "zero_width_space";
    case AttackKind::homoglyph: return "homoglyph";
    case AttackKind::whitespace: return "whitespace";
    case AttackKind::insert_paragraphs: return "insert_paragraphs";
    case AttackKind::number: return "number";
    case AttackKind::alternative_spelling: return "alternative_spelling";
    case AttackKind::synonym: return "synonym";
    case AttackKind::misspelling: return "misspelling";
    case AttackKind::article_deletion: return "article_deletion";
    case AttackKind::case_flip: return "case_flip";
  }
  return "unknown";
}

std::optional<AttackKind> parse_attack_kind(std::string_view name) {
  for (AttackKind k : kAllAttacks) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

ConfusablesTable ConfusablesTable::parse(std::string_view tsv) {
  ConfusablesTable table;
  for (const auto& [src, dst] : tsv_rows(tsv)) {
    const std::u32string s = utf8::decode(src);
    const std::u32string t = utf8::decode(dst);
    if (s.size() != 1 || !utf8::is_ascii_letter(s[0])) {
      throw Error(ErrorCode::InvalidArgument, "confusable source must be one ASCII letter: " + src);
    }
    if (t.size() != 1 || t[0] < 0x80) {
      throw Error(ErrorCode::InvalidArgument, "confusable target must be one non-ASCII code point");
    }
    if (!table.to_latin_.emplace(t[0], s[0]).second) {
      throw Error(ErrorCode::InvalidArgument, "confusable target listed twice: " + dst);
    }
    table.to_confusable_[s[0]].push_back(t[0]);
  }
  return table;
}

const ConfusablesTable& ConfusablesTable::builtin() {
  static const ConfusablesTable table = parse(resources::confusables());
  return table;
}

const std::vector<char32_t>* ConfusablesTable::look_alikes(char32_t latin) const {
  auto it = to_confusable_.find(latin);
  return it == to_confusable_.end() ? nullptr : &it->second;
}

std::optional<char32_t> ConfusablesTable::fold(char32_t cp) const {
  auto it = to_latin_.find(cp);
  if (it == to_latin_.end()) return std::nullopt;
  return it->second;
}

WordTable WordTable::parse(std::string_view tsv, bool bidirectional) {
  WordTable table;
  auto add = [&](const std::string& from, const std::string& to) {
    auto& list = table.entries_[lowercase_ascii(from)];
    if (std::find(list.begin(), list.end(), to) == list.end()) list.push_back(to);
  };
  for (const auto& [from, to] : tsv_rows(tsv)) {
    add(from, to);
    if (bidirectional) add(to, from);
  }
  return table;
}

const WordTable& WordTable::thesaurus() {
  static const WordTable table = parse(resources::thesaurus(), false);
  return table;
}

const WordTable& WordTable::spelling() {
  static const WordTable table = parse(resources::spelling(), true);
  return table;
}

const std::vector<std::string>* WordTable::lookup(std::string_view lowercase_word) const {
  auto it = entries_.find(lowercase_word);
  return it == entries_.end() ? nullptr : &it->second;
}

AttackResult apply_attack(std::string_view text, const AttackSpec& spec) {
  if (text.empty()) throw Error(ErrorCode::EmptyInput, "cannot attack empty text");
  if (!(spec.intensity >= 0.0 && spec.intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "attack intensity must lie in [0, 1]");
  }
  const std::u32string cps = utf8::decode(text);
  Rng rng(derive_seed(spec.seed ^ (0x51ED27ULL * (static_cast<std::uint64_t>(spec.kind) + 1)),
                      text));
  std::vector<Edit> edits;
  std::size_t eligible = 0;

  // Collects candidate sites, then keeps the chosen ones.
  auto select = [&](std::vector<Edit> candidates) {
    eligible = candidates.size();
    const auto chosen = choose_sites(candidates.size(), spec.intensity, rng);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (chosen[i]) edits.push_back(std::move(candidates[i]));
    }
  };

  switch (spec.kind) {
    case AttackKind::zero_width_space: {
      std::vector<Edit> c;
      for (std::size_t i = 1; i < cps.size(); ++i) {
        c.push_back({i, i, std::u32string(1, kZeroWidthSpace)});
      }
      select(std::move(c));
      break;
    }
    case AttackKind::homoglyph: {
      const auto& table = ConfusablesTable::builtin();
      std::vector<std::size_t> sites;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        if (table.look_alikes(cps[i]) != nullptr) sites.push_back(i);
      }
      eligible = sites.size();
      const auto chosen = choose_sites(sites.size(), spec.intensity, rng);
      for (std::size_t k = 0; k < sites.size(); ++k) {
        if (!chosen[k]) continue;
        const auto& options = *table.look_alikes(cps[sites[k]]);
        edits.push_back({sites[k], sites[k] + 1, std::u32string(1, options[rng.index(options.size())])});
      }
      break;
    }
    case AttackKind::whitespace: {
      std::vector<Edit> c;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == U' ') c.push_back({i, i + 1, U"  "});
      }
      select(std::move(c));
      break;
    }
    case AttackKind::insert_paragraphs: {
      // Boundary: [.!?], a whitespace run, then an uppercase letter.
      std::vector<Edit> c;
      for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
        if (cps[i] != U'.' && cps[i] != U'!' && cps[i] != U'?') continue;
        std::size_t j = i + 1;
        while (j < cps.size() && utf8::is_space(cps[j])) ++j;
        if (j > i + 1 && j < cps.size() && utf8::is_ascii_upper(cps[j])) {
          c.push_back({i + 1, j, U"\n\n"});
        }
      }
      select(std::move(c));
      break;
    }
    case AttackKind::number: {
      const int shift = spec.seed % 2 == 0 ? 1 : 9;
      std::vector<Edit> c;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        if (utf8::is_ascii_digit(cps[i])) {
          const char32_t d = U'0' + (cps[i] - U'0' + shift) % 10;
          c.push_back({i, i + 1, std::u32string(1, d)});
        }
      }
      select(std::move(c));
      break;
    }
    case AttackKind::alternative_spelling:
    case AttackKind::synonym: {
      const WordTable& table = spec.kind == AttackKind::synonym ? WordTable::thesaurus()
                                                                : WordTable::spelling();
      std::vector<std::pair<WordSpan, const std::vector<std::string>*>> sites;
      for (const WordSpan w : ascii_words(cps)) {
        if (const auto* options = table.lookup(lowercase_ascii(ascii_of(cps, w)))) {
          sites.emplace_back(w, options);
        }
      }
      eligible = sites.size();
      const auto chosen = choose_sites(sites.size(), spec.intensity, rng);
      for (std::size_t k = 0; k < sites.size(); ++k) {
        if (!chosen[k]) continue;
        const auto& [w, options] = sites[k];
        const std::string& pick = (*options)[rng.index(options->size())];
        edits.push_back({w.begin, w.end, widen(match_case(ascii_of(cps, w), pick))});
      }
      break;
    }
    case AttackKind::misspelling: {
      std::vector<WordSpan> sites;
      for (const WordSpan w : ascii_words(cps)) {
        if (w.end - w.begin >= 4) sites.push_back(w);
      }
      eligible = sites.size();
      const auto chosen = choose_sites(sites.size(), spec.intensity, rng);
      for (std::size_t k = 0; k < sites.size(); ++k) {
        if (!chosen[k]) continue;
        // Swap an interior pair; the first and last letters stay put.
        const WordSpan w = sites[k];
        const std::size_t p = w.begin + 1 + static_cast<std::size_t>(rng.index(w.end - w.begin - 3));
        edits.push_back({p, p + 2, std::u32string{cps[p + 1], cps[p]}});
      }
      break;
    }
    case AttackKind::article_deletion: {
      // The article goes with its trailing whitespace, or with the leading
      // whitespace when nothing follows it.
      std::vector<Edit> c;
      std::size_t floor = 0;
      for (const WordSpan w : ascii_words(cps)) {
        const std::string word = lowercase_ascii(ascii_of(cps, w));
        if (word != "a" && word != "an" && word != "the") continue;
        std::size_t begin = w.begin;
        std::size_t end = w.end;
        while (end < cps.size() && utf8::is_space(cps[end])) ++end;
        if (end == w.end || end == cps.size()) {
          end = w.end;
          while (begin > floor && utf8::is_space(cps[begin - 1])) --begin;
        }
        c.push_back({begin, end, U""});
        floor = end;
      }
      select(std::move(c));
      break;
    }
    case AttackKind::case_flip: {
      std::vector<Edit> c;
      for (std::size_t i = 0; i < cps.size(); ++i) {
        if (utf8::is_ascii_upper(cps[i])) {
          c.push_back({i, i + 1, std::u32string(1, cps[i] - U'A' + U'a')});
        } else if (utf8::is_ascii_lower(cps[i])) {
          c.push_back({i, i + 1, std::u32string(1, cps[i] - U'a' + U'A')});
        }
      }
      select(std::move(c));
      break;
    }
  }

  AttackResult result;
  result.eligible_sites = eligible;
  result.perturbed_sites = edits.size();
  result.noop = eligible == 0;
  result.text = edits.empty() ? std::string(text) : utf8::encode(apply_edits(cps, edits));
  return result;
}

std::string normalize_defense(std::string_view text) {
  const auto& table = ConfusablesTable::builtin();
  std::u32string out;
  out.reserve(text.size());
  bool in_space = false;
  auto emit = [&](char32_t c) {
    if (utf8::is_space(c)) {
      if (!in_space) out.push_back(U' ');
      in_space = true;
      return;
    }
    in_space = false;
    out.push_back(table.fold(c).value_or(c));
  };
  for (char32_t c : utf8::decode(text)) {
    if (is_format_char(c)) continue;
    if (auto folded = compat_fold(c)) {
      for (char32_t f : *folded) emit(f);
    } else {
      emit(c);
    }
  }
  return utf8::encode(out);
}

}  // namespace tdetect
