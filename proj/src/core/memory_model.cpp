#include <algorithm>
#include <map>
#include <tuple>

#include "simred/machine.hpp"

namespace simred {

std::uint64_t coalesce_transactions(std::span<const std::uint64_t> element_indices,
                                    std::uint32_t elem_bytes, std::uint32_t segment_bytes) {
  std::vector<std::uint64_t> segments;
  segments.reserve(element_indices.size());
  for (auto idx : element_indices) segments.push_back(idx * elem_bytes / segment_bytes);
  std::sort(segments.begin(), segments.end());
  return static_cast<std::uint64_t>(std::unique(segments.begin(), segments.end()) - segments.begin());
}

std::uint32_t bank_conflict_degree(std::span<const std::uint64_t> word_addresses,
                                   std::uint32_t num_banks) {
  std::vector<std::uint64_t> words(word_addresses.begin(), word_addresses.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  std::map<std::uint64_t, std::uint32_t> per_bank;
  std::uint32_t degree = 0;
  for (auto w : words) degree = std::max(degree, ++per_bank[w % num_banks]);
  return degree;
}

std::vector<Hazard> detect_hazards(std::span<const AccessRecord> log,
                                   std::span<const std::string> array_names) {
  struct Sets {
    std::vector<std::uint32_t> writers;
    std::vector<std::uint32_t> accessors;
  };
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::uint32_t, std::uint64_t>;
  std::map<Key, Sets> words;
  for (const auto& r : log) {
    auto& s = words[Key{r.group, r.epoch, r.array, r.address}];
    s.accessors.push_back(r.wavefront);
    if (r.write) s.writers.push_back(r.wavefront);
  }

  std::vector<Hazard> hazards;
  for (auto& [key, s] : words) {
    if (s.writers.empty()) continue;
    auto dedupe = [](std::vector<std::uint32_t>& v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(s.writers);
    dedupe(s.accessors);
    if (s.accessors.size() < 2) continue;
    const auto& [group, epoch, array, address] = key;
    for (auto writer : s.writers) {
      for (auto other : s.accessors) {
        if (other == writer) continue;
        Hazard h;
        h.group = group;
        h.epoch = epoch;
        h.array = array < array_names.size() ? array_names[array] : std::to_string(array);
        h.address = address;
        h.writer = writer;
        h.other = other;
        h.other_writes = std::binary_search(s.writers.begin(), s.writers.end(), other);
        hazards.push_back(std::move(h));
      }
    }
  }
  std::sort(hazards.begin(), hazards.end());
  return hazards;
}

}  // namespace simred
