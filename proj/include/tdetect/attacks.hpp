#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tdetect {

enum class AttackKind {
  zero_width_space,
  homoglyph,
  whitespace,
  insert_paragraphs,
  number,
  alternative_spelling,
  synonym,
  misspelling,
  article_deletion,
  case_flip,
};

inline constexpr std::array kAllAttacks = {
    AttackKind::zero_width_space,     AttackKind::homoglyph,   AttackKind::whitespace,
    AttackKind::insert_paragraphs,    AttackKind::number,      AttackKind::alternative_spelling,
    AttackKind::synonym,              AttackKind::misspelling, AttackKind::article_deletion,
    AttackKind::case_flip,
};

std::string_view to_string(AttackKind kind);
std::optional<AttackKind> parse_attack_kind(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::zero_width_space;
  double intensity = 1.0;  // fraction of eligible sites perturbed, in [0, 1]
  std::uint64_t seed = 0;
};

struct AttackResult {
  std::string text;
  std::size_t eligible_sites = 0;
  std::size_t perturbed_sites = 0;
  bool noop = false;  // no eligible sites; text is the input unchanged
};

/// Latin letter <-> look-alike code point table (data/confusables.tsv). Used
/// forwards by the homoglyph attack and backwards by the defense.
class ConfusablesTable {
 public:
  /// Rows "latin<TAB>confusable"; '#' starts a comment line. Throws
  /// Error(InvalidArgument) when a source is not an ASCII letter, a target is
  /// ASCII, or a target maps to two sources.
  static ConfusablesTable parse(std::string_view tsv);
  static const ConfusablesTable& builtin();

  const std::vector<char32_t>* look_alikes(char32_t latin) const;
  std::optional<char32_t> fold(char32_t cp) const;
  std::size_t size() const { return to_latin_.size(); }

 private:
  std::map<char32_t, std::vector<char32_t>> to_confusable_;
  std::unordered_map<char32_t, char32_t> to_latin_;
};

/// Word -> replacement rows (thesaurus, spelling variants). Keys are
/// lowercase; one key may list several replacements.
class WordTable {
 public:
  static WordTable parse(std::string_view tsv, bool bidirectional);
  static const WordTable& thesaurus();
  static const WordTable& spelling();

  const std::vector<std::string>* lookup(std::string_view lowercase_word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

/// Deterministic perturbation. Exactly round(intensity * eligible) sites are
/// chosen by a generator seeded from (seed, text); the number attack moves
/// every chosen digit +1 for even seeds and -1 for odd seeds, mod 10.
/// Throws Error(EmptyInput) for empty text and Error(InvalidArgument) for an
/// intensity outside [0, 1].
AttackResult apply_attack(std::string_view text, const AttackSpec& spec);

/// Input sanitiser: drops zero-width and other format code points, folds
/// fullwidth and ligature compatibility forms, maps confusables back to
/// Latin, and collapses whitespace runs to one space. Case is preserved.
/// Total on valid UTF-8; throws utf8::DecodeError otherwise.
std::string normalize_defense(std::string_view text);

}  // namespace tdetect
