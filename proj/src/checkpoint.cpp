#include "peranno/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "peranno/error.hpp"
#include "peranno/report.hpp"

namespace peranno {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'R', 'A', 'N', 'N', 'O', '\0'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& buf, double v) {
  put_u64(buf, std::bit_cast<std::uint64_t>(v));
}

void put_str(std::string& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.append(s);
}

void put_layer(std::string& buf, const DenseLayer& layer) {
  put_u32(buf, static_cast<std::uint32_t>(layer.in));
  put_u32(buf, static_cast<std::uint32_t>(layer.out));
  for (double v : layer.w) put_f64(buf, v);
  for (double v : layer.b) put_f64(buf, v);
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(data_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s = data_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  DenseLayer layer() {
    DenseLayer l;
    l.in = static_cast<int>(u32());
    l.out = static_cast<int>(u32());
    if (l.in < 0 || l.out < 0 || l.in > (1 << 24) || l.out > (1 << 24)) {
      throw Error("checkpoint: implausible layer dimensions");
    }
    l.w.resize(static_cast<std::size_t>(l.in) * l.out);
    for (double& v : l.w) v = f64();
    l.b.resize(l.out);
    for (double& v : l.b) v = f64();
    return l;
  }

  void raw(char* out, std::size_t len) {
    need(len);
    std::memcpy(out, data_.data() + pos_, len);
    pos_ += len;
  }

 private:
  void need(std::size_t len) const {
    if (pos_ + len > data_.size()) {
      throw Error("checkpoint: truncated file");
    }
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, kVersion);
  buf.push_back(static_cast<char>(checkpoint.kind));
  buf.push_back(static_cast<char>(checkpoint.feature_kind));
  put_u64(buf, checkpoint.seed);
  put_str(buf, checkpoint.config_echo);
  put_str(buf, checkpoint.vocab.to_text());
  put_u32(buf, static_cast<std::uint32_t>(checkpoint.best_epoch));
  put_u32(buf, static_cast<std::uint32_t>(checkpoint.stopping_epoch));

  if (checkpoint.kind == ModelKind::kSvm) {
    put_u32(buf, static_cast<std::uint32_t>(checkpoint.svm.w.size()));
    for (double v : checkpoint.svm.w) put_f64(buf, v);
    put_f64(buf, checkpoint.svm.b);
    put_f64(buf, checkpoint.svm.lambda);
    put_f64(buf, checkpoint.svm.platt_a);
    put_f64(buf, checkpoint.svm.platt_b);
    put_u64(buf, checkpoint.svm.seed);
  } else {
    const MultiTaskModel& model = checkpoint.model;
    put_u64(buf, model.init_seed);
    put_u32(buf, static_cast<std::uint32_t>(model.trunk.size()));
    for (const auto& layer : model.trunk) put_layer(buf, layer);
    put_u32(buf, static_cast<std::uint32_t>(model.heads.size()));
    for (const auto& id : model.head_ids) put_str(buf, id);
    for (const auto& layer : model.heads) put_layer(buf, layer);
  }
  write_text_file(path, buf);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  Reader reader(data);
  char magic[8];
  reader.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw Error("checkpoint: bad magic in " + path.string());
  }
  const std::uint32_t version = reader.u32();
  if (version != kVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint checkpoint;
  char kind_byte;
  reader.raw(&kind_byte, 1);
  checkpoint.kind = static_cast<ModelKind>(kind_byte);
  char feature_byte;
  reader.raw(&feature_byte, 1);
  checkpoint.feature_kind = static_cast<FeatureKind>(feature_byte);
  checkpoint.seed = reader.u64();
  checkpoint.config_echo = reader.str();
  checkpoint.vocab = Vocabulary::from_text(reader.str());
  checkpoint.best_epoch = static_cast<int>(reader.u32());
  checkpoint.stopping_epoch = static_cast<int>(reader.u32());

  if (checkpoint.kind == ModelKind::kSvm) {
    const std::uint32_t dim = reader.u32();
    checkpoint.svm.w.resize(dim);
    for (double& v : checkpoint.svm.w) v = reader.f64();
    checkpoint.svm.b = reader.f64();
    checkpoint.svm.lambda = reader.f64();
    checkpoint.svm.platt_a = reader.f64();
    checkpoint.svm.platt_b = reader.f64();
    checkpoint.svm.seed = reader.u64();
  } else {
    checkpoint.model.init_seed = reader.u64();
    const std::uint32_t n_trunk = reader.u32();
    for (std::uint32_t l = 0; l < n_trunk; ++l) {
      checkpoint.model.trunk.push_back(reader.layer());
    }
    const std::uint32_t n_heads = reader.u32();
    for (std::uint32_t h = 0; h < n_heads; ++h) {
      checkpoint.model.head_ids.push_back(reader.str());
    }
    for (std::uint32_t h = 0; h < n_heads; ++h) {
      checkpoint.model.heads.push_back(reader.layer());
    }
  }
  return checkpoint;
}

}  // namespace peranno
