#include "xdboost/error.hpp"
#include "xdboost/model/base_net.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace xdboost::model {

namespace {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host order, which must be little-endian");

constexpr char kMagic[4] = {'X', 'D', 'B', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw InputError("model file truncated");
  return v;
}

}  // namespace

void BaseNet::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json header;
  header["config"] = config_.to_json();
  header["vocab_sizes"] = layout_.vocab_sizes;
  header["continuous"] = layout_.continuous;
  header["schema_hash"] = layout_.schema_hash;
  header["seed"] = seed_;
  auto& tensors = header["tensors"] = nlohmann::ordered_json::array();
  for (const nn::Parameter* p : parameters()) {
    tensors.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model file " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const nn::Parameter* p : parameters()) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw InputError("failed writing model file " + path.string());
}

BaseNet BaseNet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + path.string());
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InputError(path.string() + " is not an xdboost network file");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion) {
    throw InputError("unsupported network file version " + std::to_string(version));
  }
  const auto length = read_pod<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw InputError("model file truncated");

  nlohmann::json header;
  NetLayout layout;
  try {
    header = nlohmann::json::parse(text);
    layout.vocab_sizes = header.at("vocab_sizes").get<std::vector<std::size_t>>();
    layout.continuous = header.at("continuous").get<std::size_t>();
    layout.schema_hash = header.at("schema_hash").get<std::uint64_t>();
    if (!header.at("tensors").is_array()) throw InputError("model file tensor list missing");
  } catch (const nlohmann::json::exception& e) {
    throw InputError("corrupt model file header in " + path.string() + ": " + e.what());
  }
  BaseNet net(layout, BaseNetConfig::from_json(header.at("config")),
              header.at("seed").get<std::uint64_t>());

  const auto& tensors = header.at("tensors");
  auto params = net.parameters();
  if (tensors.size() != params.size()) throw InputError("model file tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    nn::Parameter& p = *params[k];
    if (tensors[k].at("name").get<std::string>() != p.name ||
        tensors[k].at("rows").get<Eigen::Index>() != p.value.rows() ||
        tensors[k].at("cols").get<Eigen::Index>() != p.value.cols()) {
      throw InputError("model file tensor '" + tensors[k].at("name").get<std::string>() +
                       "' does not match the network layout");
    }
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    if (!in) throw InputError("model file truncated");
  }
  return net;
}

}  // namespace xdboost::model
