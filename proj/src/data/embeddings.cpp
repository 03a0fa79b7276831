#include "uanet/data/embeddings.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "uanet/core/error.hpp"

namespace uanet::data {

EmbeddingMap parse_embeddings(std::istream& in, std::size_t dim) {
  EmbeddingMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> v;
    v.reserve(dim);
    for (std::string f; fields >> f;) {
      char* end = nullptr;
      errno = 0;
      const double x = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size() || errno == ERANGE)
        throw ParseError("bad number '" + f + "' for word '" + word + "'", lineno);
      v.push_back(x);
    }
    if (v.size() != dim)
      throw ParseError("expected " + std::to_string(dim) + " values for '" + word + "', found " +
                       std::to_string(v.size()), lineno);
    out.emplace(std::move(word), std::move(v));
  }
  return out;
}

EmbeddingMap load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw MissingFileError(path.string());
  return parse_embeddings(in, dim);
}

double embedding_init_bound(std::size_t dim) { return std::sqrt(3.0 / static_cast<double>(dim)); }

ad::Tensor build_embedding_table(const Vocabulary& vocab, const EmbeddingMap* pretrained, std::size_t dim, Rng& rng,
                                 std::size_t* matched) {
  const std::size_t rows = vocab.word_count();
  const double bound = embedding_init_bound(dim);
  std::vector<double> values(rows * dim);
  std::size_t hits = 0;
  for (std::size_t id = 0; id < rows; ++id) {
    double* row = values.data() + id * dim;
    const EmbeddingMap::mapped_type* found = nullptr;
    if (pretrained != nullptr && id != Vocabulary::kUnk) {
      auto it = pretrained->find(vocab.word(id));
      if (it != pretrained->end()) found = &it->second;
    }
    if (found != nullptr) {
      std::copy(found->begin(), found->end(), row);
      ++hits;
    } else {
      for (std::size_t j = 0; j < dim; ++j) row[j] = rng.uniform(-bound, bound);
    }
  }
  if (matched != nullptr) *matched = hits;
  return ad::Tensor::from({rows, dim}, std::move(values));
}

}  // namespace uanet::data
