#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "icsscope/net.hpp"

namespace icsscope {

/// Longest-prefix-match table over IPv4 CIDRs.
///
/// One hash map per prefix length; a lookup probes lengths from /32 down to /0
/// and returns the first hit. Shared by the ASN and country tables and the
/// scanner registry.
template <typename Value>
class PrefixTable {
 public:
  enum class InsertResult { Added, SameValue, Replaced };

  // An existing identical prefix is overwritten (last insert wins).
  InsertResult insert(Cidr prefix, Value value) {
    auto& bucket = by_length_[prefix.length];
    auto [it, added] = bucket.try_emplace(prefix.base.value, value);
    if (added) {
      ++size_;
      present_[prefix.length] = true;
      return InsertResult::Added;
    }
    if (it->second == value) return InsertResult::SameValue;
    it->second = std::move(value);
    return InsertResult::Replaced;
  }

  bool contains_prefix(Cidr prefix) const {
    return by_length_[prefix.length].count(prefix.base.value) != 0;
  }

  struct Match {
    Cidr prefix;
    const Value* value;
  };

  std::optional<Match> match(Ipv4 ip) const {
    for (int len = 32; len >= 0; --len) {
      if (!present_[len]) continue;
      auto mask = Cidr::mask_of(static_cast<std::uint8_t>(len));
      const auto& bucket = by_length_[len];
      if (auto it = bucket.find(ip.value & mask); it != bucket.end()) {
        return Match{Cidr{Ipv4{ip.value & mask}, static_cast<std::uint8_t>(len)}, &it->second};
      }
    }
    return std::nullopt;
  }

  std::optional<Value> lookup(Ipv4 ip) const {
    if (auto m = match(ip)) return *m->value;
    return std::nullopt;
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

 private:
  std::array<std::unordered_map<std::uint32_t, Value>, 33> by_length_{};
  std::array<bool, 33> present_{};
  std::size_t size_{0};
};

}  // namespace icsscope
