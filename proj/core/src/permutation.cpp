#include "mospa/permutation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mospa/error.hpp"

namespace mospa {

Permutation::Permutation(std::vector<std::size_t> mapping) : mapping_(std::move(mapping)) {
  std::vector<bool> seen(mapping_.size(), false);
  for (std::size_t v : mapping_) {
    if (v >= mapping_.size() || seen[v]) {
      throw InvalidArgument("permutation mapping is not a bijection: " + to_string());
    }
    seen[v] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  return Permutation(std::move(m));
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < mapping_.size(); ++i) {
    if (mapping_[i] != i) return false;
  }
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::size_t> inv(mapping_.size());
  for (std::size_t i = 0; i < mapping_.size(); ++i) inv[mapping_[i]] = i;
  return Permutation(std::move(inv));
}

// Lehmer code: rank = sum_i (#j > i with m[j] < m[i]) * (n-1-i)!
std::size_t Permutation::lexicographic_rank() const {
  const std::size_t n = mapping_.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (mapping_[j] < mapping_[i]) ++smaller;
    }
    rank += smaller * factorial(n - 1 - i);
  }
  return rank;
}

std::string Permutation::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < mapping_.size(); ++i) {
    if (i) os << ',';
    os << mapping_[i];
  }
  os << ']';
  return os.str();
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("compose: permutations of different sizes");
  }
  std::vector<std::size_t> c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = b[a[i]];
  return Permutation(std::move(c));
}

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<Permutation> permutation_enumerate(std::size_t n, std::size_t cap) {
  if (n == 0) throw InvalidArgument("permutation_enumerate: n must be positive");
  if (n > cap) {
    throw CapacityError("permutation_enumerate: n = " + std::to_string(n) +
                        " exceeds the enumeration cap " + std::to_string(cap) + " (" +
                        std::to_string(n) + "! = " +
                        (n <= 20 ? std::to_string(factorial(n)) : std::string("overflow")) +
                        " permutations, at most " + std::to_string(factorial(cap)) + " allowed)");
  }
  std::vector<Permutation> out;
  out.reserve(factorial(n));
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  do {
    out.emplace_back(m);
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

Permutation permutation_from_rank(std::size_t n, std::size_t rank) {
  if (rank >= factorial(n)) {
    throw InvalidArgument("permutation_from_rank: rank out of range");
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> m;
  m.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t f = factorial(n - 1 - i);
    const std::size_t k = rank / f;
    rank %= f;
    m.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return Permutation(std::move(m));
}

}  // namespace mospa
