#include "adt/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace adt::model {
namespace {

constexpr char kMagic[8] = {'A', 'D', 'T', 'S', 'N', 'A', 'P', '1'};

nlohmann::json header_json(const ModelSnapshot& snap) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : param_blocks(snap.params))
    blocks.push_back({{"name", b.name}, {"size", b.size}});
  return {
      {"kind", to_string(snap.kind)},
      {"factors", snap.config.factors},
      {"mlp_tower", snap.config.mlp_tower},
      {"hidden", snap.config.hidden},
      {"corruption", snap.config.corruption},
      {"n_users", snap.n_users},
      {"n_items", snap.n_items},
      {"seed", snap.seed},
      {"step", snap.step},
      {"blocks", blocks},
  };
}

}  // namespace

void save_snapshot(const ModelSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

  const std::string header = header_json(snapshot).dump();
  const auto header_len = static_cast<std::uint32_t>(header.size());
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  std::vector<float> buffer;
  for (const auto& b : param_blocks(snapshot.params)) {
    buffer.resize(static_cast<std::size_t>(b.size));
    for (std::ptrdiff_t k = 0; k < b.size; ++k)
      buffer[static_cast<std::size_t>(k)] = static_cast<float>(b.data[k]);
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("short write while saving checkpoint: " + path);
}

ModelSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  char magic[sizeof(kMagic)];
  std::uint32_t header_len = 0;
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not a model checkpoint: " + path);
  if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len)))
    throw std::runtime_error("truncated checkpoint header: " + path);
  std::string header(header_len, '\0');
  if (!in.read(header.data(), header_len))
    throw std::runtime_error("truncated checkpoint header: " + path);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt checkpoint header: " + std::string(e.what()));
  }

  ModelConfig config;
  config.kind = model_kind_from_string(j.at("kind").get<std::string>());
  config.factors = j.at("factors").get<int>();
  config.mlp_tower = j.at("mlp_tower").get<std::vector<int>>();
  config.hidden = j.at("hidden").get<int>();
  config.corruption = j.at("corruption").get<double>();

  // Rebuild the parameter structure from the config, then overwrite with the
  // stored payload; init_params guarantees shapes consistent with the header.
  ModelSnapshot snap = init_params(config, j.at("n_users").get<std::int32_t>(),
                                   j.at("n_items").get<std::int32_t>(),
                                   j.at("seed").get<std::uint64_t>());
  snap.step = j.at("step").get<std::int64_t>();

  const auto& blocks = j.at("blocks");
  auto views = param_blocks(snap.params);
  if (blocks.size() != views.size())
    throw std::runtime_error("checkpoint block table does not match the model layout");

  std::vector<float> buffer;
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto expect = blocks[k].at("size").get<std::ptrdiff_t>();
    if (expect != views[k].size)
      throw std::runtime_error("checkpoint block size mismatch in '" +
                               std::string(views[k].name) + "'");
    buffer.resize(static_cast<std::size_t>(expect));
    if (!in.read(reinterpret_cast<char*>(buffer.data()),
                 static_cast<std::streamsize>(buffer.size() * sizeof(float))))
      throw std::runtime_error("truncated checkpoint payload: " + path);
    for (std::ptrdiff_t t = 0; t < expect; ++t)
      views[k].data[t] = static_cast<double>(buffer[static_cast<std::size_t>(t)]);
  }
  return snap;
}

}  // namespace adt::model
