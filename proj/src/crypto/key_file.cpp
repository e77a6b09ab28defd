#include "vpvn/crypto/key_file.hpp"

#include <fstream>
#include <iterator>

#include "vpvn/error.hpp"

namespace vpvn::crypto {

namespace {

constexpr std::string_view kPrivateMagic = "VPVS";
constexpr std::string_view kPublicMagic = "VPVP";

void put_magic(Bytes& out, std::string_view magic) {
  out.insert(out.end(), magic.begin(), magic.end());
}

void expect_magic(Reader& r, std::string_view magic) {
  ByteView got = r.take(4);
  if (!std::equal(got.begin(), got.end(), magic.begin())) {
    throw Error(Errc::kMalformed, "bad key file magic");
  }
}

ByteView length_prefixed(Reader& r, std::uint32_t expected) {
  std::uint32_t n = r.u32();
  if (n != expected) throw Error(Errc::kMalformed, "unexpected field length " + std::to_string(n));
  return r.take(n);
}

}  // namespace

Bytes encode_private_key_file(const KeyPair& pair) {
  Bytes out;
  put_magic(out, kPrivateMagic);
  put_u32(out, kScalarSize);
  put_bytes(out, pair.private_scalar.view());
  put_u32(out, kPointSize);
  put_bytes(out, pair.public_point);
  return out;
}

Bytes encode_public_key_file(const PublicPoint& point) {
  Bytes out;
  put_magic(out, kPublicMagic);
  put_u32(out, kPointSize);
  put_bytes(out, point);
  return out;
}

KeyPair decode_private_key_file(ByteView data) {
  Reader r(data);
  expect_magic(r, kPrivateMagic);
  ByteView scalar = length_prefixed(r, kScalarSize);
  ByteView point = length_prefixed(r, kPointSize);
  if (!r.done()) throw Error(Errc::kMalformed, "trailing bytes in key file");
  validate_public_point(point);
  KeyPair pair = keypair_from_scalar(scalar.first<kScalarSize>());
  if (!std::equal(point.begin(), point.end(), pair.public_point.begin())) {
    throw Error(Errc::kMalformed, "public point does not match private scalar");
  }
  return pair;
}

PublicPoint decode_public_key_file(ByteView data) {
  Reader r(data);
  expect_magic(r, kPublicMagic);
  ByteView point = length_prefixed(r, kPointSize);
  if (!r.done()) throw Error(Errc::kMalformed, "trailing bytes in key file");
  validate_public_point(point);
  PublicPoint out{};
  std::copy(point.begin(), point.end(), out.begin());
  return out;
}

void write_file(const std::filesystem::path& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace vpvn::crypto
