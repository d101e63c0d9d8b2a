#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mospa {

/// Largest N for which all N! permutations are enumerated (8! = 40320).
inline constexpr std::size_t kDefaultEnumerationCap = 8;

/// A bijection on {0..N-1}; index i maps to mapping()[i].
///
/// Acting on a stacked state, block i of the result is block pi(i) of the
/// input, so pi(x_hat) pairs target i of x with estimate block pi(i).
class Permutation {
 public:
  /// Throws InvalidArgument if `mapping` is not a bijection.
  explicit Permutation(std::vector<std::size_t> mapping);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return mapping_.size(); }
  std::size_t operator[](std::size_t i) const { return mapping_[i]; }
  std::span<const std::size_t> mapping() const { return mapping_; }

  bool is_identity() const;
  Permutation inverse() const;

  /// Position in the lexicographic enumeration of all size() ! permutations.
  std::size_t lexicographic_rank() const;

  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::size_t> mapping_;
};

/// compose(a, b) is the permutation c with apply(c, x) == apply(a, apply(b, x)),
/// that is c(i) = b(a(i)).
Permutation compose(const Permutation& a, const Permutation& b);

/// All n! permutations in lexicographic order of their mapping.
/// Throws CapacityError when n exceeds `cap`, InvalidArgument when n == 0.
std::vector<Permutation> permutation_enumerate(std::size_t n,
                                               std::size_t cap = kDefaultEnumerationCap);

/// Inverse of Permutation::lexicographic_rank.
Permutation permutation_from_rank(std::size_t n, std::size_t rank);

std::size_t factorial(std::size_t n);

}  // namespace mospa
