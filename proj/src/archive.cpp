#include "jmt/archive.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <set>

#include "jmt/data_io.hpp"
#include "jmt/error.hpp"

namespace jmt {
namespace {

constexpr char kMagic[4] = {'J', 'M', 'T', '1'};
constexpr std::size_t kMaxRank = 8;

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_integral_v<T> || std::is_floating_point_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

void put_string(std::string& out, std::string_view s) {
  put<std::uint64_t>(out, s.size());
  out.append(s);
}

class Reader {
 public:
  Reader(std::string_view bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  template <typename T>
  T get(const std::string& what) {
    need(sizeof(T), what);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    }
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string_view bytes(std::size_t n, const std::string& what) {
    need(n, what);
    std::string_view v = bytes_.substr(pos_, n);
    pos_ += n;
    return v;
  }

  std::string get_string(const std::string& what) {
    auto n = get<std::uint64_t>(what);
    return std::string(bytes(n, what));
  }

  bool done() const { return pos_ == bytes_.size(); }
  const std::string& source() const { return source_; }

 private:
  void need(std::size_t n, const std::string& what) {
    if (bytes_.size() - pos_ < n) throw ParseError(source_ + ": truncated archive while reading " + what);
  }
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string join_tab(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += '\t';
    s += items[i];
  }
  return s;
}

std::vector<std::string> split_tab(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find('\t', start);
    out.push_back(s.substr(start, p == std::string::npos ? std::string::npos : p - start));
    if (p == std::string::npos) return out;
    start = p + 1;
  }
}

}  // namespace

std::string serialize_model(const JointModel& model) {
  std::map<std::string, std::string> kv = model.config().to_key_values();
  const Vocabulary& v = model.vocab();
  std::vector<std::string> counts;
  for (std::size_t i = 0; i < v.word_size(); ++i) counts.push_back(std::to_string(v.frequency(i)));
  kv["vocab.words"] = join_tab(v.words());
  kv["vocab.counts"] = join_tab(counts);
  kv["vocab.ngrams"] = join_tab(v.ngrams());
  kv["labels.pos"] = join_tab(model.pos_labels().names());
  kv["labels.chunk"] = join_tab(model.chunk_labels().names());
  kv["labels.deprel"] = join_tab(model.dep_labels().names());
  std::string block;
  for (const auto& [key, value] : kv) {
    if (value.find('\n') != std::string::npos) throw PreconditionError("config value for '" + key + "' has a newline");
    block += key + "=" + value + "\n";
  }

  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kArchiveVersion);
  put_string(out, block);
  const auto params = model.params().all();
  put<std::uint64_t>(out, params.size());
  for (const Parameter* p : params) {
    put_string(out, p->name());
    const Tensor& t = p->value();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put<std::uint64_t>(out, d);
    for (double x : t.values) put<double>(out, x);
  }
  return out;
}

JointModel deserialize_model(std::string_view bytes, const std::string& source) {
  Reader r(bytes, source);
  auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw ParseError(source + ": not a JMT1 model archive (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kArchiveVersion) {
    throw ParseError(source + ": unsupported archive version " + std::to_string(version));
  }
  const std::string block = r.get_string("config block");
  std::map<std::string, std::string> model_kv;
  std::map<std::string, std::string> extra;
  std::size_t start = 0;
  while (start < block.size()) {
    std::size_t end = block.find('\n', start);
    if (end == std::string::npos) end = block.size();
    std::string line = block.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source + ": malformed config line '" + line + "'");
    std::string key = line.substr(0, eq);
    (key.rfind("vocab.", 0) == 0 || key.rfind("labels.", 0) == 0 ? extra : model_kv)[key] = line.substr(eq + 1);
  }
  ModelConfig config = ModelConfig::from_key_values(model_kv);
  Vocabulary vocab(config.lowercase_words, config.ngram_orders);
  const auto words = split_tab(extra["vocab.words"]);
  const auto counts = split_tab(extra["vocab.counts"]);
  if (words.empty() || words[0] != Vocabulary::kUnkToken || counts.size() != words.size()) {
    throw ParseError(source + ": vocabulary block is inconsistent");
  }
  for (std::size_t i = 1; i < words.size(); ++i) vocab.add_word_entry(words[i], std::stoull(counts[i]));
  for (const auto& g : split_tab(extra["vocab.ngrams"])) vocab.add_ngram_entry(g);

  JointModel model(config, std::move(vocab), LabelSet(split_tab(extra["labels.pos"])),
                   LabelSet(split_tab(extra["labels.chunk"])), LabelSet(split_tab(extra["labels.deprel"])));

  const auto count = r.get<std::uint64_t>("tensor count");
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = r.get_string("tensor name");
    const std::string what = "tensor '" + name + "'";
    const auto rank = r.get<std::uint32_t>(what);
    if (rank == 0 || rank > kMaxRank) throw ParseError(source + ": bad rank for " + what);
    Shape shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>(what)));
    Parameter* p = model.params().find(name);
    if (!p) throw ParseError(source + ": archive has unknown " + what);
    if (!seen.insert(name).second) throw ParseError(source + ": duplicate " + what);
    if (p->value().shape != shape) {
      throw ParseError(source + ": " + what + " has shape " + shape_to_string(shape) + ", model expects " +
                       shape_to_string(p->value().shape));
    }
    for (double& x : p->value().values) x = r.get<double>(what);
  }
  std::string missing;
  for (const Parameter* p : model.params().all()) {
    if (!seen.count(p->name())) missing += (missing.empty() ? "" : ", ") + p->name();
  }
  if (!missing.empty()) throw ParseError(source + ": archive is missing tensors: " + missing);
  if (!r.done()) throw ParseError(source + ": trailing bytes after the last tensor");
  return model;
}

void save_model(const JointModel& model, const std::string& path) { write_text_file(path, serialize_model(model)); }

JointModel load_model(const std::string& path) { return deserialize_model(read_text_file(path), path); }

}  // namespace jmt
