#include "seqvec/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "seqvec/error.hpp"

namespace seqvec {

namespace {

class ByteWriter {
 public:
  template <std::unsigned_integral U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void put_string(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint16_t>::max()) throw DataError("string too long for model file");
    put(static_cast<std::uint16_t>(s.size()));
    out_.append(s);
  }
  void put_bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n, std::string_view what) const {
    if (remaining() < n)
      throw FormatError("truncated model file: " + std::string(what) + " needs " + std::to_string(n) +
                            " bytes, " + std::to_string(remaining()) + " left",
                        pos_);
  }

  template <std::unsigned_integral U>
  U get(std::string_view what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  float get_f32(std::string_view what) { return std::bit_cast<float>(get<std::uint32_t>(what)); }
  double get_f64(std::string_view what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }
  std::string get_string(std::string_view what) {
    const auto n = get<std::uint16_t>(what);
    need(n, what);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view get_bytes(std::size_t n, std::string_view what) {
    need(n, what);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

void put_matrix(ByteWriter& w, const Matrix<float>& m) {
  for (float v : m.values()) w.put_f32(v);
}

void get_matrix(ByteReader& r, Matrix<float>& m, std::string_view what) {
  for (auto& v : m.values()) v = r.get_f32(what);
}

std::string format_float(float v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string serialize_model(const EmbeddingModel& model) {
  model.check_shapes();
  const auto& c = model.config;
  ByteWriter w;
  w.put_bytes(kModelMagic);
  w.put(kModelVersion);
  w.put(static_cast<std::uint8_t>(c.architecture));
  w.put(static_cast<std::uint32_t>(c.dim));
  w.put(static_cast<std::uint32_t>(c.window));
  w.put(static_cast<std::uint8_t>(c.objective));
  w.put(static_cast<std::uint32_t>(c.negatives));
  w.put_f64(c.subsample);
  w.put(static_cast<std::uint32_t>(c.epochs));
  w.put_f64(c.alpha0);
  w.put_f64(c.alpha_min);
  w.put(static_cast<std::uint64_t>(c.seed));
  w.put(static_cast<std::uint32_t>(model.tokenizer.k));
  w.put(static_cast<std::uint8_t>(model.tokenizer.mode));
  w.put(static_cast<std::uint64_t>(model.vocab.min_count()));

  w.put(static_cast<std::uint32_t>(model.vocab.size()));
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    w.put_string(model.vocab.tokens()[i]);
    w.put(static_cast<std::uint64_t>(model.vocab.counts()[i]));
  }
  w.put(static_cast<std::uint32_t>(model.doc_ids.size()));
  for (const auto& id : model.doc_ids) w.put_string(id);
  put_matrix(w, model.docs);
  put_matrix(w, model.words);
  put_matrix(w, model.outputs);
  return w.take();
}

EmbeddingModel deserialize_model(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(kModelMagic.size(), "magic") != kModelMagic) throw FormatError("not a seqvec model file (bad magic)", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kModelVersion) throw FormatError("unsupported model version " + std::to_string(version), 4);

  EmbeddingModel model;
  auto& c = model.config;
  std::size_t at = r.offset();
  const auto arch = r.get<std::uint8_t>("architecture");
  if (arch > static_cast<std::uint8_t>(Architecture::DBOW)) throw FormatError("unknown architecture code", at);
  c.architecture = static_cast<Architecture>(arch);
  c.dim = r.get<std::uint32_t>("dim");
  c.window = r.get<std::uint32_t>("window");
  at = r.offset();
  const auto objective = r.get<std::uint8_t>("objective");
  if (objective > static_cast<std::uint8_t>(ObjectiveKind::HierarchicalSoftmax))
    throw FormatError("unknown objective code", at);
  c.objective = static_cast<ObjectiveKind>(objective);
  c.negatives = r.get<std::uint32_t>("negatives");
  c.subsample = r.get_f64("subsample");
  c.epochs = r.get<std::uint32_t>("epochs");
  c.alpha0 = r.get_f64("alpha0");
  c.alpha_min = r.get_f64("alpha_min");
  c.seed = r.get<std::uint64_t>("seed");
  model.tokenizer.k = r.get<std::uint32_t>("k");
  at = r.offset();
  const auto mode = r.get<std::uint8_t>("token mode");
  if (mode > static_cast<std::uint8_t>(TokenMode::Overlapping)) throw FormatError("unknown token mode", at);
  model.tokenizer.mode = static_cast<TokenMode>(mode);
  const auto min_count = r.get<std::uint64_t>("min_count");
  try {
    c.validate();
    model.tokenizer.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid stored configuration: ") + e.what(), r.offset());
  }

  at = r.offset();
  const auto vocab_size = r.get<std::uint32_t>("vocabulary size");
  r.need(static_cast<std::size_t>(vocab_size) * 10, "vocabulary block");
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(vocab_size);
  counts.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    tokens.push_back(r.get_string("vocabulary token"));
    counts.push_back(r.get<std::uint64_t>("vocabulary count"));
  }
  try {
    model.vocab = Vocabulary(std::move(tokens), std::move(counts), min_count);
  } catch (const DataError& e) {
    throw FormatError(std::string("invalid vocabulary: ") + e.what(), at);
  }
  if (model.vocab.size() == 0) throw FormatError("empty vocabulary", at);
  if (c.objective == ObjectiveKind::HierarchicalSoftmax) {
    if (model.vocab.size() < 2) throw FormatError("hierarchical softmax model with fewer than two tokens", at);
    model.vocab.ensure_huffman();
  }

  const auto n_docs = r.get<std::uint32_t>("document count");
  r.need(static_cast<std::size_t>(n_docs) * 2, "document id block");
  model.doc_ids.reserve(n_docs);
  for (std::uint32_t i = 0; i < n_docs; ++i) model.doc_ids.push_back(r.get_string("document id"));

  const std::size_t out_rows = c.objective == ObjectiveKind::NegativeSampling ? vocab_size : vocab_size - 1;
  const std::size_t floats = (static_cast<std::size_t>(n_docs) + vocab_size + out_rows) * c.dim;
  const std::size_t payload = floats * sizeof(float);
  if (r.remaining() < payload)
    throw FormatError("truncated model file: matrices need " + std::to_string(payload) + " bytes, " +
                          std::to_string(r.remaining()) + " left",
                      r.offset());
  if (r.remaining() > payload)
    throw FormatError(std::to_string(r.remaining() - payload) + " trailing bytes after the matrices",
                      r.offset() + payload);
  model.docs = Matrix<float>(n_docs, c.dim);
  model.words = Matrix<float>(vocab_size, c.dim);
  model.outputs = Matrix<float>(out_rows, c.dim);
  get_matrix(r, model.docs, "document matrix");
  get_matrix(r, model.words, "word matrix");
  get_matrix(r, model.outputs, "output matrix");
  return model;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void save_model(const std::filesystem::path& path, const EmbeddingModel& model) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

EmbeddingModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

void write_vectors(std::ostream& out, std::span<const std::string> ids, const Matrix<float>& vectors) {
  if (ids.size() != vectors.rows()) throw DataError("id count does not match vector count");
  out << vectors.rows() << ' ' << vectors.cols() << '\n';
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    out << ids[r];
    for (float v : vectors.row(r)) out << ' ' << format_float(v);
    out << '\n';
  }
}

VectorTable read_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2 || !parse_number(fields[0], n) || !parse_number(fields[1], d) || d == 0)
      throw ParseError("expected header 'N d'", line_no);
    break;
  }
  if (line_no == 0 || d == 0) throw ParseError("empty vector file", 1);

  VectorTable table;
  table.vectors = Matrix<float>(n, d);
  table.ids.reserve(n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (row >= n) throw ParseError("more vectors than the header declares", line_no);
    if (fields.size() != d + 1)
      throw ParseError("expected " + std::to_string(d + 1) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    table.ids.emplace_back(fields[0]);
    auto dst = table.vectors.row(row);
    for (std::size_t j = 0; j < d; ++j)
      if (!parse_number(fields[j + 1], dst[j]))
        throw ParseError("invalid number '" + std::string(fields[j + 1]) + "'", line_no);
    ++row;
  }
  if (row != n)
    throw ParseError("header declares " + std::to_string(n) + " vectors, found " + std::to_string(row), line_no);
  return table;
}

Matrix<double> to_double(const Matrix<float>& m) {
  Matrix<double> out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  return out;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  out << "#seqvec-corpus k=" << corpus.config.k << " mode=" << to_string(corpus.config.mode)
      << " min_count=" << corpus.vocab.min_count() << '\n';
  for (std::size_t tag = 0; tag < corpus.sequence_ids.size(); ++tag)
    out << "#id " << tag << ' ' << corpus.sequence_ids[tag] << '\n';
  for (const auto& doc : corpus.docs) {
    out << doc.doc_tag << ' ' << doc.phase;
    for (TokenId t : doc.tokens) out << ' ' << corpus.vocab.token(t);
    out << '\n';
  }
}

Corpus read_corpus(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<TokenizerConfig> cfg;
  std::uint64_t min_count = 1;
  std::map<std::uint32_t, std::string> ids;
  std::vector<RawDoc> docs;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_ws(line);
    if (fields.empty()) continue;

    if (fields[0] == "#seqvec-corpus") {
      TokenizerConfig c;
      for (std::size_t i = 1; i < fields.size(); ++i) {
        const auto f = fields[i];
        const auto eq = f.find('=');
        if (eq == std::string_view::npos) throw ParseError("malformed corpus header field", line_no);
        const auto key = f.substr(0, eq);
        const auto value = f.substr(eq + 1);
        bool ok = true;
        if (key == "k")
          ok = parse_number(value, c.k);
        else if (key == "mode")
          c.mode = parse_token_mode(value);
        else if (key == "min_count")
          ok = parse_number(value, min_count);
        if (!ok) throw ParseError("invalid value for '" + std::string(key) + "'", line_no);
      }
      cfg = c;
      continue;
    }
    if (fields[0] == "#id") {
      std::uint32_t tag = 0;
      if (fields.size() != 3 || !parse_number(fields[1], tag)) throw ParseError("expected '#id <tag> <id>'", line_no);
      ids[tag] = std::string(fields[2]);
      continue;
    }
    if (fields[0].front() == '#') continue;

    RawDoc doc;
    if (fields.size() < 3 || !parse_number(fields[0], doc.doc_tag) || !parse_number(fields[1], doc.phase))
      throw ParseError("expected 'doc_tag phase kmer ...'", line_no);
    for (std::size_t i = 2; i < fields.size(); ++i) doc.kmers.emplace_back(fields[i]);
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw DataError("empty corpus: no documents");

  if (!cfg) {
    TokenizerConfig c;
    c.k = docs.front().kmers.front().size();
    c.mode = TokenMode::Overlapping;
    for (const auto& d : docs)
      if (d.phase > 0) c.mode = TokenMode::NonOverlapping;
    cfg = c;
  }
  std::uint32_t n_tags = 0;
  for (const auto& d : docs) n_tags = std::max(n_tags, d.doc_tag + 1);
  if (!ids.empty()) n_tags = std::max(n_tags, ids.rbegin()->first + 1);
  std::vector<std::string> sequence_ids(n_tags);
  for (std::uint32_t t = 0; t < n_tags; ++t) {
    auto it = ids.find(t);
    sequence_ids[t] = it != ids.end() ? it->second : std::to_string(t);
  }
  return corpus_from_documents(docs, std::move(sequence_ids), *cfg, min_count);
}

}  // namespace seqvec
