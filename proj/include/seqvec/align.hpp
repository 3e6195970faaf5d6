#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqvec/knn.hpp"
#include "seqvec/sequences.hpp"

namespace seqvec {

/// Scores indexed by letter - 'A'.
using SubstitutionTable = std::array<std::array<int, 26>, 26>;

/// Reads an NCBI-style matrix: '#' comments, a header row of residue letters,
/// then one row per letter. Non-letter columns such as '*' are ignored.
/// Letters the file does not cover take the file's 'X' scores (or its minimum
/// score when there is no X).
SubstitutionTable load_substitution_matrix(std::istream& in);
SubstitutionTable load_substitution_matrix(std::string_view text);

const SubstitutionTable& blosum62();

/// Uniform match/mismatch table.
SubstitutionTable uniform_table(int match, int mismatch);

/// Affine gaps: a gap of length L scores gap_open + (L - 1) * gap_extend,
/// with gap_open <= gap_extend <= 0.
struct AlignParams {
  SubstitutionTable substitution = blosum62();
  int gap_open = -11;
  int gap_extend = -1;

  void validate() const;
};

/// Best local alignment score (Gotoh recurrence, floored at zero). Linear
/// memory in the shorter sequence.
int smith_waterman(std::string_view a, std::string_view b, const AlignParams& params);

/// Query scored against every database record (records sharing the query id
/// are skipped); top-k by score, ties by smaller id. `workers` = 0 picks the
/// hardware concurrency.
std::vector<NeighborResult> align_topk(std::span<const SequenceRecord> db, const SequenceRecord& query, std::size_t k,
                                       const AlignParams& params, std::size_t workers = 0);

/// Majority vote over the top-k alignment hits; larger summed score wins ties.
std::string align_classify(std::span<const SequenceRecord> db, const std::map<std::string, std::string>& labels,
                           const SequenceRecord& query, std::size_t k, const AlignParams& params,
                           std::size_t workers = 0);

}  // namespace seqvec
