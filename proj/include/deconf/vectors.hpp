#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace deconf {

enum class VecFormat { Binary, Text };

// Fixed-dimension word -> vector table. Values are kept as 32-bit floats
// (the width of the word2vec binary format); arithmetic downstream
// accumulates in doubles.
class VectorStore {
public:
  explicit VectorStore(std::uint32_t dim) : dim_(dim) {}

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }

  void add(const std::string &word, std::span<const float> values);

  std::optional<std::uint32_t> find(const std::string &word) const;
  const std::string &word(std::uint32_t row) const { return words_[row]; }
  std::span<const float> vec(std::uint32_t row) const {
    return {data_.data() + static_cast<std::size_t>(row) * dim_, dim_};
  }
  double norm(std::uint32_t row) const { return norms_[row]; }

private:
  std::uint32_t dim_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::vector<std::string> words_; // file order
  std::unordered_map<std::string, std::uint32_t> index_;
};

VectorStore load_word2vec(const std::filesystem::path &path, VecFormat format);
// Text writer prints 6 significant digits; binary writes 32-bit floats.
void save_word2vec(const std::filesystem::path &path, const VectorStore &store,
                   VecFormat format);

struct LookupPolicy {
  char multiword_joiner = '_';
  bool case_fallback = true;
};

// Exact match first (spaces replaced by the joiner), then lowercase.
std::optional<std::uint32_t> lookup(const VectorStore &store,
                                    const std::string &word,
                                    const LookupPolicy &policy);

struct Neighbor {
  std::string key;
  double cosine = 0.0;
};

// Brute-force top-N by cosine. Ties break by ascending key string. Zero-norm
// stored vectors are skipped; a zero query is an error.
std::vector<Neighbor> nearest(const VectorStore &store,
                              std::span<const double> query,
                              std::size_t top_n,
                              const std::set<std::string> &exclude = {});

double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

} // namespace deconf
