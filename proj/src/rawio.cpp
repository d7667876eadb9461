#include "lsplit/rawio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "lsplit/error.hpp"

namespace lsplit {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::uint32_t le = to_le(v);
  out.write(reinterpret_cast<const char*>(&le), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return to_le(v);
}

}  // namespace

void write_raw(const std::filesystem::path& path, const std::vector<Image>& images) {
  if (images.empty()) fail(ErrorCode::InvalidArgument, "nothing to write");
  const Image& ref = images.front();
  for (const Image& im : images)
    if (!im.same_shape(ref)) fail(ErrorCode::ShapeMismatch, "raw stack images differ in shape");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string(), path.string());
  out.write(kRawMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(images.size()));
  put_u32(out, static_cast<std::uint32_t>(ref.height));
  put_u32(out, static_cast<std::uint32_t>(ref.width));
  put_u32(out, static_cast<std::uint32_t>(ref.channels));
  for (const Image& im : images)
    for (double v : im.data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string(), path.string());
}

std::vector<Image> read_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string(), path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kRawMagic, 8) != 0)
    fail(ErrorCode::Format, "bad raw magic in " + path.string(), path.string());
  const std::uint32_t m = get_u32(in), h = get_u32(in), w = get_u32(in), c = get_u32(in);
  if (!in) fail(ErrorCode::Format, "truncated raw header in " + path.string(), path.string());
  const std::uint64_t per = std::uint64_t{h} * w * c;
  const auto file_size = std::filesystem::file_size(path);
  if (file_size != 24 + 4 * per * m)
    fail(ErrorCode::Format, "raw payload size mismatch in " + path.string(), path.string());
  std::vector<Image> images;
  images.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    Image im(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c));
    for (double& v : im.data) v = std::bit_cast<float>(get_u32(in));
    images.push_back(std::move(im));
  }
  return images;
}

}  // namespace lsplit
