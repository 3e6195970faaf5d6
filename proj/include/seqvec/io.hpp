#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqvec/embedding.hpp"
#include "seqvec/matrix.hpp"
#include "seqvec/tokenizer.hpp"

namespace seqvec {

// Binary model file, all integers and floats little-endian:
//
//   "SQV1"  u32 version
//   config: u8 arch, u32 dim, u32 window, u8 objective, u32 negatives,
//           f64 subsample, u32 epochs, f64 alpha0, f64 alpha_min, u64 seed,
//           u32 k, u8 token mode, u64 min_count
//   vocab:  u32 V, then per token u16 length + bytes + u64 count
//   docs:   u32 N, then per document u16 length + sequence id bytes
//   D (N x dim), W (V x dim), O (V or V-1 x dim): f32 row-major
//
// The file must end exactly after O.
inline constexpr std::string_view kModelMagic = "SQV1";
inline constexpr std::uint32_t kModelVersion = 1;

std::string serialize_model(const EmbeddingModel& model);
/// Throws FormatError (with byte offset) on bad magic, version, truncation,
/// inconsistent shapes or trailing bytes.
EmbeddingModel deserialize_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const EmbeddingModel& model);
EmbeddingModel load_model(const std::filesystem::path& path);

/// "N d" header, then "id v1 ... vd" per row.
struct VectorTable {
  std::vector<std::string> ids;
  Matrix<float> vectors;
};

void write_vectors(std::ostream& out, std::span<const std::string> ids, const Matrix<float>& vectors);
VectorTable read_vectors(std::istream& in);
Matrix<double> to_double(const Matrix<float>& m);

/// Tokenized corpus text: a "#seqvec-corpus k=<k> mode=<mode>" line, one
/// "#id <doc_tag> <sequence id>" line per sequence, then one line per
/// document: "doc_tag phase kmer kmer ...".
void write_corpus(std::ostream& out, const Corpus& corpus);
/// Rebuilds the corpus; the vocabulary is recounted from the documents.
Corpus read_corpus(std::istream& in);

std::string read_file(const std::filesystem::path& path);

}  // namespace seqvec
