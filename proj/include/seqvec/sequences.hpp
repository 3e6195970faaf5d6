#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqvec {

/// Set of uppercase residue letters. `wildcard` is the replacement symbol
/// used by the Replace policy; alphabets without one reject unknown letters.
class Alphabet {
 public:
  Alphabet(std::string name, std::string_view symbols, std::optional<char> wildcard = std::nullopt);

  /// 20 standard amino acids plus B, J, O, U, X, Z. Wildcard 'X'.
  static const Alphabet& protein();
  /// A, C, G, T. No wildcard.
  static const Alphabet& dna();
  /// Lookup by name ("protein" or "dna").
  static const Alphabet& named(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  const std::string& symbols() const noexcept { return symbols_; }
  std::optional<char> wildcard() const noexcept { return wildcard_; }

  /// `c` must already be uppercase.
  bool contains(char c) const noexcept {
    const auto u = static_cast<unsigned char>(c);
    return u >= 'A' && u <= 'Z' && member_[u - 'A'];
  }

 private:
  std::string name_;
  std::string symbols_;
  std::optional<char> wildcard_;
  std::array<bool, 26> member_{};
};

struct SequenceRecord {
  std::string id;
  std::string description;
  std::string residues;
  std::optional<std::string> family;

  friend bool operator==(const SequenceRecord&, const SequenceRecord&) = default;
};

enum class CharPolicy { Strict, Replace };

/// Reads FASTA. Lowercase is folded to uppercase and multi-line bodies are
/// joined. Throws ParseError (with line/column) on any malformed input.
std::vector<SequenceRecord> parse_fasta(std::istream& in, const Alphabet& alphabet,
                                        CharPolicy policy = CharPolicy::Strict);
std::vector<SequenceRecord> parse_fasta(std::string_view text, const Alphabet& alphabet,
                                        CharPolicy policy = CharPolicy::Strict);

void write_fasta(std::ostream& out, std::span<const SequenceRecord> records, std::size_t width = 60);

struct FamilyLabels {
  std::map<std::string, std::string> by_id;
  std::size_t duplicates = 0;
};

/// Two-column "id<TAB>family" file, '#' comments. Columns beyond the second
/// are ignored.
FamilyLabels load_family_labels(std::istream& in);
FamilyLabels load_family_labels(std::string_view text);

/// Copies family labels onto records by id; returns how many were labeled.
std::size_t attach_labels(std::span<SequenceRecord> records, const FamilyLabels& labels);

struct FamilyHistogram {
  // Family sizes 1-10 fall in the first bucket; the reported ranges skip 10.
  static constexpr std::array<const char*, 4> kBucketNames{"<10", "11-100", "101-1000", ">1000"};

  std::map<std::string, std::size_t> counts;
  std::array<std::size_t, 4> buckets{};
  std::size_t unlabeled = 0;

  static std::size_t bucket_of(std::size_t family_size) noexcept;
};

FamilyHistogram family_histogram(std::span<const SequenceRecord> records);

}  // namespace seqvec
