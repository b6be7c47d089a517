#include "hge/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace hge {

namespace {

constexpr char kMagic[4] = {'H', 'G', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

// ---- little-endian primitive IO -------------------------------------------

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

[[noreturn]] void throw_truncated(const std::istream& is, std::size_t expected,
                                  const std::string& what) {
  throw IoError("checkpoint: truncated while reading " + what + ": expected " +
                std::to_string(expected) + " bytes, got " + std::to_string(is.gcount()));
}

template <class T>
T take(std::istream& is, const std::string& what) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw_truncated(is, sizeof(T), what);
  return v;
}

void put_matrix(std::ostream& os, const MatF& m) {
  // RowMajor storage: rows are contiguous, whole block written in one shot
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(m.size())));
}

MatF take_matrix(std::istream& is, Index rows, Index cols, const std::string& what) {
  MatF m(rows, cols);
  const std::size_t bytes = sizeof(float) * static_cast<std::size_t>(m.size());
  is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(bytes));
  if (!is) throw_truncated(is, bytes, what);
  return m;
}

void put_vector(std::ostream& os, const VecF& v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(v.size())));
}

VecF take_vector(std::istream& is, Index n, const std::string& what) {
  VecF v(n);
  const std::size_t bytes = sizeof(float) * static_cast<std::size_t>(v.size());
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!is) throw_truncated(is, bytes, what);
  return v;
}

void put_json(std::ostream& os, const nlohmann::json& j) {
  const std::string text = j.dump();
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

nlohmann::json take_json(std::istream& is, const std::string& what) {
  const auto len = take<std::uint64_t>(is, what + " length");
  if (len > (std::uint64_t(1) << 32)) throw IoError("checkpoint: implausible " + what + " size");
  std::string text(static_cast<std::size_t>(len), '\0');
  is.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!is) throw_truncated(is, text.size(), what);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("checkpoint: corrupt " + what + ": " + e.what());
  }
}

std::uint32_t u32_of(Index v, const std::string& what) {
  if (v < 0 || v > static_cast<Index>(std::numeric_limits<std::uint32_t>::max())) {
    throw DataError("checkpoint: " + what + " out of range");
  }
  return static_cast<std::uint32_t>(v);
}

void put_layer(std::ostream& os, const HgeLayer& layer) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(layer.level));
  put<std::uint32_t>(os, u32_of(layer.incidence.n_categories(), "categories"));
  put<std::uint32_t>(os, u32_of(layer.hidden(), "hidden size"));
  std::uint8_t flags = 0;
  if (layer.skip) flags |= 1;
  if (layer.masked_softmax) flags |= 2;
  put<std::uint8_t>(os, flags);
  put<std::uint8_t>(os, layer.activation == Activation::Relu ? 0 : 1);
  put<float>(os, layer.leaky_alpha);
  for (std::int32_t c : layer.incidence.category_of_all()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(c));
  }
}

}  // namespace

void save_checkpoint(const TrainedModel& m, const std::string& path,
                     const nlohmann::json& config_echo) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("checkpoint: cannot open '" + path + "' for writing");

  os.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(os, kVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(m.kind));
  put<std::uint32_t>(os, u32_of(m.n_users, "n_users"));
  put<std::uint32_t>(os, u32_of(m.n_items, "n_items"));

  switch (m.kind) {
    case ModelKind::Random:
      break;
    case ModelKind::Mf:
      put<std::uint32_t>(os, u32_of(m.mf.d(), "d"));
      put_matrix(os, m.mf.user_embeddings);
      put_matrix(os, m.mf.item_embeddings);
      break;
    case ModelKind::Als:
      put<std::uint32_t>(os, u32_of(m.als.x.cols(), "d"));
      put_matrix(os, m.als.x);
      put_matrix(os, m.als.y);
      put<float>(os, m.als.lambda_x);
      put<float>(os, m.als.lambda_y);
      put<float>(os, m.als.alpha);
      break;
    case ModelKind::Hybrid: {
      put<std::uint32_t>(os, u32_of(m.hybrid.d(), "d"));
      put<std::uint32_t>(os, u32_of(m.hybrid.n_features(), "n_features"));
      const auto n_levels =
          m.hybrid.item_features.empty() ? 0u : static_cast<std::uint32_t>(m.hybrid.item_features[0].size());
      put<std::uint32_t>(os, n_levels);
      for (const auto& feats : m.hybrid.item_features) {
        if (feats.size() != n_levels) {
          throw DataError("checkpoint: ragged item feature lists");
        }
        for (std::int32_t f : feats) put<std::uint32_t>(os, static_cast<std::uint32_t>(f));
      }
      put_matrix(os, m.hybrid.user_embeddings);
      put_matrix(os, m.hybrid.item_embeddings);
      put_matrix(os, m.hybrid.feature_embeddings);
      put_vector(os, m.hybrid.user_bias);
      put_vector(os, m.hybrid.item_bias);
      break;
    }
    case ModelKind::Hge: {
      put<std::uint32_t>(os, u32_of(m.hge.base.d(), "d"));
      put<std::uint32_t>(os, static_cast<std::uint32_t>(m.hge.layers.size()));
      for (const auto& layer : m.hge.layers) put_layer(os, layer);
      put_matrix(os, m.hge.base.user_embeddings);
      put_matrix(os, m.hge.base.item_embeddings);
      for (const auto& layer : m.hge.layers) {
        put_matrix(os, layer.w1);
        put_matrix(os, layer.w2);
      }
      break;
    }
  }

  put_json(os, config_echo);
  nlohmann::json history = nlohmann::json::array();
  for (double v : m.loss_history) history.push_back(v);
  put_json(os, history);
  os.flush();
  if (!os) throw IoError("checkpoint: write to '" + path + "' failed");
}

TrainedModel load_checkpoint(const std::string& path, nlohmann::json* config_echo) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint: cannot open '" + path + "'");

  char magic[4];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("checkpoint: '" + path + "' is not a model checkpoint (bad magic)");
  }
  const auto version = take<std::uint32_t>(is, "version");
  if (version != kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto kind_byte = take<std::uint8_t>(is, "model kind");
  if (kind_byte > 4) {
    throw DataError("checkpoint: unknown model kind code " + std::to_string(kind_byte));
  }

  TrainedModel m;
  m.kind = static_cast<ModelKind>(kind_byte);
  m.n_users = static_cast<Index>(take<std::uint32_t>(is, "n_users"));
  m.n_items = static_cast<Index>(take<std::uint32_t>(is, "n_items"));

  switch (m.kind) {
    case ModelKind::Random:
      break;
    case ModelKind::Mf: {
      const auto d = static_cast<Index>(take<std::uint32_t>(is, "d"));
      m.mf.user_embeddings = take_matrix(is, m.n_users, d, "user embeddings");
      m.mf.item_embeddings = take_matrix(is, m.n_items, d, "item embeddings");
      break;
    }
    case ModelKind::Als: {
      const auto d = static_cast<Index>(take<std::uint32_t>(is, "d"));
      m.als.x = take_matrix(is, m.n_users, d, "user factors");
      m.als.y = take_matrix(is, m.n_items, d, "item factors");
      m.als.lambda_x = take<float>(is, "lambda_x");
      m.als.lambda_y = take<float>(is, "lambda_y");
      m.als.alpha = take<float>(is, "alpha");
      break;
    }
    case ModelKind::Hybrid: {
      const auto d = static_cast<Index>(take<std::uint32_t>(is, "d"));
      const auto n_features = static_cast<Index>(take<std::uint32_t>(is, "n_features"));
      const auto n_levels = take<std::uint32_t>(is, "n_levels");
      m.hybrid.item_features.resize(static_cast<std::size_t>(m.n_items));
      for (auto& feats : m.hybrid.item_features) {
        feats.resize(n_levels);
        for (auto& f : feats) {
          f = static_cast<std::int32_t>(take<std::uint32_t>(is, "item features"));
          if (f < 0 || f >= n_features) throw DataError("checkpoint: feature id out of range");
        }
      }
      m.hybrid.user_embeddings = take_matrix(is, m.n_users, d, "user embeddings");
      m.hybrid.item_embeddings = take_matrix(is, m.n_items, d, "item embeddings");
      m.hybrid.feature_embeddings = take_matrix(is, n_features, d, "feature embeddings");
      m.hybrid.user_bias = take_vector(is, m.n_users, "user bias");
      m.hybrid.item_bias = take_vector(is, m.n_items, "item bias");
      break;
    }
    case ModelKind::Hge: {
      const auto d = static_cast<Index>(take<std::uint32_t>(is, "d"));
      const auto n_layers = take<std::uint32_t>(is, "layer count");
      std::vector<std::pair<Index, Index>> layer_dims;  // (K, h) in stack order
      m.hge.layers.clear();
      for (std::uint32_t l = 0; l < n_layers; ++l) {
        // header only; parameter blocks follow the embedding tables
        HgeLayer layer;
        layer.level = static_cast<int>(take<std::uint32_t>(is, "layer level"));
        const auto k = take<std::uint32_t>(is, "layer categories");
        const auto h = take<std::uint32_t>(is, "layer hidden size");
        const auto flags = take<std::uint8_t>(is, "layer flags");
        layer.skip = (flags & 1) != 0;
        layer.masked_softmax = (flags & 2) != 0;
        const auto act = take<std::uint8_t>(is, "layer activation");
        if (act > 1) throw DataError("checkpoint: unknown activation code " + std::to_string(act));
        layer.activation = act == 0 ? Activation::Relu : Activation::LeakyRelu;
        layer.leaky_alpha = take<float>(is, "layer leaky_alpha");
        std::vector<std::int32_t> category_of(static_cast<std::size_t>(m.n_items));
        for (auto& c : category_of) {
          c = static_cast<std::int32_t>(take<std::uint32_t>(is, "layer category map"));
        }
        layer.incidence = SparseIncidence(m.n_items, std::move(category_of));
        if (layer.incidence.n_categories() != static_cast<Index>(k)) {
          throw DataError("checkpoint: layer category map does not match its declared count");
        }
        layer_dims.emplace_back(static_cast<Index>(k), static_cast<Index>(h));
        m.hge.layers.push_back(std::move(layer));
      }
      m.hge.base.user_embeddings = take_matrix(is, m.n_users, d, "user embeddings");
      m.hge.base.item_embeddings = take_matrix(is, m.n_items, d, "item embeddings");
      for (std::uint32_t l = 0; l < n_layers; ++l) {
        m.hge.layers[l].w1 = take_matrix(is, layer_dims[l].first, layer_dims[l].second, "layer w1");
        m.hge.layers[l].w2 = take_matrix(is, m.n_items, layer_dims[l].second, "layer w2");
      }
      validate_layer_order(m.hge);
      break;
    }
  }

  nlohmann::json echo = take_json(is, "config echo");
  if (config_echo) *config_echo = std::move(echo);
  const nlohmann::json history = take_json(is, "loss history");
  if (!history.is_array()) throw IoError("checkpoint: loss history is not an array");
  m.loss_history.clear();
  for (const auto& v : history) m.loss_history.push_back(v.get<double>());
  return m;
}

void require_kind(const TrainedModel& m, ModelKind expected) {
  if (m.kind != expected) {
    throw DataError("checkpoint: holds a '" + model_kind_name(m.kind) +
                    "' model, expected '" + model_kind_name(expected) + "'");
  }
}

}  // namespace hge
