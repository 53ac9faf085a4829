#include <algorithm>
#include <numeric>
#include <random>

#include "ookgate/error.hpp"
#include "ookgate/ingest.hpp"

namespace ookgate {

namespace {

// Byte offset of every code point start, plus the total length.
std::vector<std::size_t> code_point_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  return offsets;
}

}  // namespace

std::vector<DocumentChunk> chunk_corpus(std::span<const TextRecord> docs, std::size_t size,
                                        std::size_t overlap) {
  if (size <= overlap) {
    throw Error(Errc::InvalidChunking, "chunk size " + std::to_string(size) +
                                           " must exceed overlap " + std::to_string(overlap));
  }
  const std::size_t step = size - overlap;
  std::vector<DocumentChunk> chunks;
  for (const auto& doc : docs) {
    if (doc.text.empty()) continue;
    const auto offsets = code_point_offsets(doc.text);
    const std::size_t n_cp = offsets.size() - 1;
    std::size_t index = 0;
    for (std::size_t start = 0;; start += step) {
      const std::size_t stop = std::min(start + size, n_cp);
      DocumentChunk c;
      c.chunk_id = doc.id + "#" + std::to_string(index++);
      c.source_doc = doc.id;
      c.begin = offsets[start];
      c.end = offsets[stop];
      c.text = doc.text.substr(c.begin, c.end - c.begin);
      chunks.push_back(std::move(c));
      if (stop == n_cp) break;
    }
  }
  return chunks;
}

std::vector<DocumentChunk> sample_chunks(std::span<const DocumentChunk> chunks, std::size_t count,
                                         std::uint64_t seed) {
  if (count >= chunks.size()) return {chunks.begin(), chunks.end()};
  std::mt19937_64 rng(seed);
  std::vector<DocumentChunk> out;
  out.reserve(count);
  std::sample(chunks.begin(), chunks.end(), std::back_inserter(out), count, rng);
  return out;
}

}  // namespace ookgate
