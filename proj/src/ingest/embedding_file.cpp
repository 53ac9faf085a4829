#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "ookgate/error.hpp"
#include "ookgate/ingest.hpp"

namespace ookgate {

namespace {

constexpr std::array<char, 4> kMagic{'O', 'O', 'K', 'G'};
constexpr std::size_t kHeaderSize = 24;

std::uint32_t metric_tag(Metric m) { return m == Metric::Cosine ? 0u : 1u; }

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::string& in, std::size_t at) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return value;
}

}  // namespace

std::filesystem::path ids_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".ids";
  return p;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& set) {
  if (set.ids.size() != set.vectors.size()) {
    throw Error(Errc::InvalidArgument, "id count does not match vector count");
  }
  if (set.dim == 0) throw Error(Errc::InvalidArgument, "dim must be positive");
  for (const auto& v : set.vectors) {
    if (v.size() != set.dim) throw Error(Errc::InvalidArgument, "ragged embedding rows");
  }
  for (const auto& id : set.ids) {
    if (id.find('\n') != std::string::npos) {
      throw Error(Errc::InvalidArgument, "ids cannot contain newlines");
    }
  }

  std::string header;
  header.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(header, kEmbeddingFileVersion);
  put_le<std::uint32_t>(header, static_cast<std::uint32_t>(set.dim));
  put_le<std::uint64_t>(header, set.vectors.size());
  put_le<std::uint32_t>(header, metric_tag(set.metric));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& v : set.vectors) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  }
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());

  std::ofstream ids(ids_sidecar(path), std::ios::binary | std::ios::trunc);
  if (!ids) throw Error(Errc::IoError, "cannot write " + ids_sidecar(path).string());
  for (const auto& id : set.ids) ids << id << '\n';
  if (!ids) throw Error(Errc::IoError, "write failed for " + ids_sidecar(path).string());
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto where = path.string();

  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(Errc::BadMagic, where + " is not an embedding file");
  }
  if (bytes.size() < kHeaderSize) throw Error(Errc::InvalidHeader, where + ": truncated header");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  const auto dim = get_le<std::uint32_t>(bytes, 8);
  const auto count = get_le<std::uint64_t>(bytes, 12);
  const auto tag = get_le<std::uint32_t>(bytes, 20);
  if (version != kEmbeddingFileVersion) {
    throw Error(Errc::InvalidHeader, where + ": unsupported version " + std::to_string(version));
  }
  if (dim == 0) throw Error(Errc::InvalidHeader, where + ": dim is 0");
  if (tag > 1) throw Error(Errc::InvalidHeader, where + ": unknown metric tag " + std::to_string(tag));
  if (count > std::numeric_limits<std::uint64_t>::max() / (4ull * dim)) {
    throw Error(Errc::InvalidHeader, where + ": count overflows");
  }
  const std::uint64_t payload = count * dim * 4;
  const std::uint64_t available = bytes.size() - kHeaderSize;
  if (available < payload) {
    throw Error(Errc::TruncatedPayload, where + ": expected " + std::to_string(payload) +
                                            " payload bytes, found " + std::to_string(available));
  }
  if (available > payload) throw Error(Errc::InvalidHeader, where + ": trailing bytes after payload");

  EmbeddingSet set;
  set.dim = dim;
  set.metric = tag == 0 ? Metric::Cosine : Metric::DotProduct;
  set.vectors.resize(count, Embedding(dim));
  for (std::uint64_t i = 0; i < count; ++i) {
    std::memcpy(set.vectors[i].data(), bytes.data() + kHeaderSize + i * dim * 4, dim * 4);
  }

  const auto sidecar = ids_sidecar(path);
  std::ifstream ids(sidecar, std::ios::binary);
  if (!ids) throw Error(Errc::IoError, "cannot read id sidecar " + sidecar.string());
  std::string line;
  while (std::getline(ids, line)) set.ids.push_back(line);
  if (set.ids.size() != count) {
    throw Error(Errc::IdCountMismatch, sidecar.string() + " lists " + std::to_string(set.ids.size()) +
                                           " ids for " + std::to_string(count) + " vectors");
  }
  return set;
}

}  // namespace ookgate
