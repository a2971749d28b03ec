#include "curvox/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "curvox/config.hpp"
#include "curvox/util.hpp"

namespace curvox {

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;
  std::string path;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) {
      throw IoError("truncated checkpoint: " + path);
    }
    const std::uint32_t v = static_cast<std::uint32_t>(buf[pos]) |
                            (static_cast<std::uint32_t>(buf[pos + 1]) << 8) |
                            (static_cast<std::uint32_t>(buf[pos + 2]) << 16) |
                            (static_cast<std::uint32_t>(buf[pos + 3]) << 24);
    pos += 4;
    return v;
  }

  std::string bytes(std::size_t count) {
    if (pos + count > buf.size()) {
      throw IoError("truncated checkpoint: " + path);
    }
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), count);
    pos += count;
    return s;
  }
};

}  // namespace

std::string serialize_model_config(const ModelConfig& c) {
  KeyValueFile kv;
  kv.set_int("grid_n", c.grid_n);
  kv.set_int("latent_dim", c.latent_dim);
  kv.set("encoder_hidden", join_ints(c.encoder_hidden));
  kv.set("decoder_hidden", join_ints(c.decoder_hidden));
  kv.set("nonlinearity", to_string(c.nonlinearity));
  kv.set_double("logvar_min", c.logvar_min);
  kv.set_double("logvar_max", c.logvar_max);
  return kv.serialize();
}

ModelConfig parse_model_config(const std::string& text) {
  const KeyValueFile kv = KeyValueFile::parse_text(text);
  ModelConfig c;
  c.grid_n = kv.get_int("grid_n");
  c.latent_dim = kv.get_int("latent_dim");
  c.encoder_hidden = parse_int_list(kv.get("encoder_hidden"));
  c.decoder_hidden = parse_int_list(kv.get("decoder_hidden"));
  c.nonlinearity = nonlinearity_from_string(kv.get("nonlinearity"));
  c.logvar_min = kv.get_double("logvar_min");
  c.logvar_max = kv.get_double("logvar_max");
  c.validate();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const Parameters& params) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), {'C', 'K', 'P', 'T', '1'});
  const std::string cfg = serialize_model_config(config);
  put_u32le(buf, static_cast<std::uint32_t>(cfg.size()));
  buf.insert(buf.end(), cfg.begin(), cfg.end());
  put_u32le(buf, static_cast<std::uint32_t>(params.entries.size()));
  for (const auto& e : params.entries) {
    put_u32le(buf, static_cast<std::uint32_t>(e.name.size()));
    buf.insert(buf.end(), e.name.begin(), e.name.end());
    put_u32le(buf, static_cast<std::uint32_t>(e.shape.size()));
    for (int d : e.shape) put_u32le(buf, static_cast<std::uint32_t>(d));
    for (double v : *e.values) {
      put_u32le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  write_binary_file(path, buf.data(), buf.size());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto buf = read_binary_file(path);
  if (buf.size() < 5 || std::memcmp(buf.data(), "CKPT1", 5) != 0) {
    throw IoError("not a CKPT1 file: " + path.string());
  }
  Reader r{buf, 5, path.string()};
  const std::uint32_t cfg_len = r.u32();
  Checkpoint out;
  out.config = parse_model_config(r.bytes(cfg_len));
  const std::uint32_t entry_count = r.u32();
  for (std::uint32_t e = 0; e < entry_count; ++e) {
    Parameters::Entry entry;
    entry.name = r.bytes(r.u32());
    const std::uint32_t rank = r.u32();
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const int extent = static_cast<int>(r.u32());
      entry.shape.push_back(extent);
      count *= static_cast<std::size_t>(extent);
    }
    auto values = std::make_shared<std::vector<double>>(count);
    for (std::size_t i = 0; i < count; ++i) {
      const float f = std::bit_cast<float>(r.u32());
      if (!std::isfinite(f)) {
        throw IoError("non-finite parameter value in " + path.string());
      }
      (*values)[i] = static_cast<double>(f);
    }
    entry.values = std::move(values);
    out.params.entries.push_back(std::move(entry));
  }
  if (r.pos != buf.size()) {
    throw IoError("trailing bytes in checkpoint: " + path.string());
  }
  return out;
}

}  // namespace curvox
