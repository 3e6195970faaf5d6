#include "seqvec/sequences.hpp"

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "seqvec/error.hpp"

namespace seqvec {

namespace {

bool is_blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

void chomp(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Alphabet::Alphabet(std::string name, std::string_view symbols, std::optional<char> wildcard)
    : name_(std::move(name)), wildcard_(wildcard) {
  for (char c : symbols) {
    if (c < 'A' || c > 'Z') throw ConfigError("alphabet symbols must be uppercase A-Z");
    if (member_[c - 'A']) throw ConfigError(std::string("duplicate alphabet symbol '") + c + "'");
    member_[c - 'A'] = true;
    symbols_.push_back(c);
  }
  if (wildcard_ && !contains(*wildcard_)) throw ConfigError("alphabet wildcard must be one of its symbols");
}

const Alphabet& Alphabet::protein() {
  static const Alphabet alphabet("protein", "ACDEFGHIKLMNPQRSTVWYBJOUXZ", 'X');
  return alphabet;
}

const Alphabet& Alphabet::dna() {
  static const Alphabet alphabet("dna", "ACGT");
  return alphabet;
}

const Alphabet& Alphabet::named(std::string_view name) {
  if (name == "protein") return protein();
  if (name == "dna") return dna();
  throw ConfigError("unknown alphabet '" + std::string(name) + "' (expected protein or dna)");
}

std::vector<SequenceRecord> parse_fasta(std::istream& in, const Alphabet& alphabet, CharPolicy policy) {
  std::vector<SequenceRecord> records;
  std::unordered_set<std::string> seen;
  std::size_t header_line = 0;
  std::size_t line_no = 0;
  std::string line;

  auto finish = [&] {
    if (records.empty()) return;
    if (records.back().residues.empty())
      throw ParseError("record '" + records.back().id + "' has an empty sequence", header_line);
  };

  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (is_blank(line)) continue;

    if (line.front() == '>') {
      finish();
      header_line = line_no;
      const std::string_view rest = trim(std::string_view(line).substr(1));
      const auto split = rest.find_first_of(" \t");
      SequenceRecord rec;
      rec.id = std::string(rest.substr(0, split));
      if (split != std::string_view::npos) rec.description = std::string(trim(rest.substr(split)));
      if (rec.id.empty()) throw ParseError("header without an identifier", line_no, 2);
      if (!seen.insert(rec.id).second) throw ParseError("duplicate sequence id '" + rec.id + "'", line_no);
      records.push_back(std::move(rec));
      continue;
    }

    if (records.empty()) throw ParseError("sequence data before the first '>' header", line_no, 1);
    std::string& residues = records.back().residues;
    for (std::size_t col = 0; col < line.size(); ++col) {
      const char raw = line[col];
      if (raw == ' ' || raw == '\t') continue;
      const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
      if (alphabet.contains(c)) {
        residues.push_back(c);
      } else if (policy == CharPolicy::Replace && alphabet.wildcard()) {
        residues.push_back(*alphabet.wildcard());
      } else {
        throw ParseError(std::string("character '") + raw + "' is not in the " + alphabet.name() + " alphabet",
                         line_no, col + 1);
      }
    }
  }
  if (in.bad()) throw DataError("I/O error while reading FASTA");
  finish();
  if (records.empty()) throw ParseError("empty corpus: no FASTA records", line_no == 0 ? 1 : line_no);
  return records;
}

std::vector<SequenceRecord> parse_fasta(std::string_view text, const Alphabet& alphabet, CharPolicy policy) {
  std::istringstream in{std::string(text)};
  return parse_fasta(in, alphabet, policy);
}

void write_fasta(std::ostream& out, std::span<const SequenceRecord> records, std::size_t width) {
  if (width == 0) width = 60;
  for (const auto& rec : records) {
    out << '>' << rec.id;
    if (!rec.description.empty()) out << ' ' << rec.description;
    out << '\n';
    for (std::size_t i = 0; i < rec.residues.size(); i += width)
      out << std::string_view(rec.residues).substr(i, width) << '\n';
  }
}

FamilyLabels load_family_labels(std::istream& in) {
  FamilyLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    chomp(line);
    if (is_blank(line) || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected 'id<TAB>family'", line_no);
    const auto end = line.find('\t', tab + 1);
    std::string id(trim(std::string_view(line).substr(0, tab)));
    std::string family(trim(std::string_view(line).substr(tab + 1, end == std::string::npos ? end : end - tab - 1)));
    if (id.empty()) throw ParseError("empty sequence id", line_no, 1);
    if (family.empty()) throw ParseError("empty family label", line_no, tab + 2);
    auto [it, inserted] = labels.by_id.insert_or_assign(std::move(id), std::move(family));
    if (!inserted) ++labels.duplicates;
  }
  if (in.bad()) throw DataError("I/O error while reading labels");
  return labels;
}

FamilyLabels load_family_labels(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_family_labels(in);
}

std::size_t attach_labels(std::span<SequenceRecord> records, const FamilyLabels& labels) {
  std::size_t n = 0;
  for (auto& rec : records) {
    if (auto it = labels.by_id.find(rec.id); it != labels.by_id.end()) {
      rec.family = it->second;
      ++n;
    }
  }
  return n;
}

std::size_t FamilyHistogram::bucket_of(std::size_t family_size) noexcept {
  if (family_size <= 10) return 0;
  if (family_size <= 100) return 1;
  if (family_size <= 1000) return 2;
  return 3;
}

FamilyHistogram family_histogram(std::span<const SequenceRecord> records) {
  FamilyHistogram h;
  for (const auto& rec : records) {
    if (rec.family)
      ++h.counts[*rec.family];
    else
      ++h.unlabeled;
  }
  for (const auto& [family, n] : h.counts) ++h.buckets[FamilyHistogram::bucket_of(n)];
  return h;
}

}  // namespace seqvec
