#include "modsat/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace modsat {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'M', 'O', 'D', 'S', 'A', 'T', 'C', 'K'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError("truncated checkpoint");
  return v;
}

void put_doubles(std::ostream& os, const double* data, Eigen::Index n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* data, Eigen::Index n) {
  if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)))) {
    throw CheckpointError("truncated checkpoint");
  }
}

void write_mlp(std::ostream& os, const Mlp& net) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.sizes().size()));
  for (int s : net.sizes()) put<std::int32_t>(os, s);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(net.hidden_activation()));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(net.output_activation()));
  for (const auto& l : net.layers()) {
    put_doubles(os, l.weight.data(), l.weight.size());
    put_doubles(os, l.bias.data(), l.bias.size());
  }
}

Mlp read_mlp(std::istream& is) {
  const auto count = get<std::uint32_t>(is);
  if (count < 2 || count > 64) throw CheckpointError("corrupt layer count");
  std::vector<int> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto s = get<std::int32_t>(is);
    if (s < 1 || s > (1 << 20)) throw CheckpointError("corrupt layer size");
    sizes.push_back(s);
  }
  const auto hidden = get<std::uint8_t>(is);
  const auto output = get<std::uint8_t>(is);
  if (hidden > 2 || output > 2) throw CheckpointError("corrupt activation code");
  Mlp net(sizes, static_cast<Activation>(hidden), static_cast<Activation>(output));
  for (auto& l : net.layers()) {
    get_doubles(is, l.weight.data(), l.weight.size());
    get_doubles(is, l.bias.data(), l.bias.size());
  }
  return net;
}

void write_actor(std::ostream& os, const Actor& a) {
  write_mlp(os, a.trunk);
  write_mlp(os, a.design_head);
  write_mlp(os, a.control_head);
}

Actor read_actor(std::istream& is) {
  Actor a;
  a.trunk = read_mlp(is);
  a.design_head = read_mlp(is);
  a.control_head = read_mlp(is);
  if (a.design_head.input_size() != a.trunk.output_size() || a.control_head.input_size() != a.trunk.output_size()) {
    throw CheckpointError("actor heads do not match trunk");
  }
  return a;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write " + tmp.string());
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, ckpt.version);
    const std::string meta = ckpt.meta.dump();
    put<std::uint64_t>(os, meta.size());
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    const auto& n = ckpt.nets;
    write_actor(os, n.actor);
    write_actor(os, n.actor_target);
    for (const Critic* c : {&n.critic1, &n.critic2, &n.critic1_target, &n.critic2_target}) write_mlp(os, c->net);
    if (!os) throw CheckpointError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointError("not a checkpoint file");
  Checkpoint ckpt;
  ckpt.version = get<std::uint32_t>(is);
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(ckpt.version) + " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto len = get<std::uint64_t>(is);
  if (len > (1u << 26)) throw CheckpointError("corrupt metadata length");
  std::string meta(len, '\0');
  if (!is.read(meta.data(), static_cast<std::streamsize>(len))) throw CheckpointError("truncated checkpoint");
  try {
    ckpt.meta = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt metadata: ") + e.what());
  }
  auto& n = ckpt.nets;
  n.actor = read_actor(is);
  n.actor_target = read_actor(is);
  for (Critic* c : {&n.critic1, &n.critic2, &n.critic1_target, &n.critic2_target}) c->net = read_mlp(is);
  if (!(n.actor_target.trunk.same_shape(n.actor.trunk) && n.critic1_target.net.same_shape(n.critic1.net) &&
        n.critic2_target.net.same_shape(n.critic2.net))) {
    throw CheckpointError("target shapes do not mirror online shapes");
  }
  return ckpt;
}

}  // namespace modsat
