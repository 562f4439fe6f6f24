#ifndef WIKIREL_DIAGNOSTICS_H_
#define WIKIREL_DIAGNOSTICS_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace wikirel {

// A non-fatal problem found while processing input. `code` is a short
// stable identifier ("unclosed-ref", "depth-exceeded", ...).
struct Diagnostic {
  std::string code;
  std::string message;
  std::size_t offset = 0;

  bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

// Counts of diagnostics by code, as recorded in run manifests.
class DiagnosticTally {
 public:
  void add(const std::string& code, std::size_t n = 1) { counts_[code] += n; }
  void add(const Diagnostics& diags) {
    for (const auto& d : diags) add(d.code);
  }
  void merge(const DiagnosticTally& other) {
    for (const auto& [k, v] : other.counts_) counts_[k] += v;
  }
  std::size_t count(const std::string& code) const {
    auto it = counts_.find(code);
    return it == counts_.end() ? 0 : it->second;
  }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : counts_) n += v;
    return n;
  }
  const std::map<std::string, std::size_t>& counts() const { return counts_; }

 private:
  std::map<std::string, std::size_t> counts_;
};

}  // namespace wikirel

#endif  // WIKIREL_DIAGNOSTICS_H_
