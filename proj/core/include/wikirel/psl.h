#ifndef WIKIREL_PSL_H_
#define WIKIREL_PSL_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>

namespace wikirel {

class PslError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Public Suffix List rules. Labels are stored lower-case and punycode
// encoded; wildcard rules are keyed by the part after "*." and exception
// rules by the part after "!".
class PslRuleSet {
 public:
  // Throws PslError if no rule survives parsing.
  static PslRuleSet parse(std::string_view text, bool include_private = true);
  static PslRuleSet load(const std::filesystem::path& path, bool include_private = true);

  std::size_t normal_count() const { return normal_.size(); }
  std::size_t wildcard_count() const { return wildcard_.size(); }
  std::size_t exception_count() const { return exception_.size(); }

  // Number of trailing labels of `host` (normalized) forming its public
  // suffix. Hosts matching no rule fall back to the implicit "*" rule.
  std::size_t suffix_label_count(std::string_view host) const;

 private:
  std::unordered_set<std::string> normal_;
  std::unordered_set<std::string> wildcard_;
  std::unordered_set<std::string> exception_;
};

// Lower-cases, strips one trailing dot and punycode-encodes non-ASCII labels.
// Returns nullopt for empty labels or characters not allowed in host names.
std::optional<std::string> normalize_host(std::string_view host);

// Punycode (RFC 3492) encoding of one label, without the "xn--" prefix.
std::optional<std::string> punycode_encode(std::u32string_view label);

// Registrable domain (public suffix plus one label) of a host name, or
// nullopt when the host is invalid or is itself a public suffix.
std::optional<std::string> registrable_domain(std::string_view host, const PslRuleSet& rules);

// The source identity of a cited website.
struct SourceDomain {
  std::string domain;

  auto operator<=>(const SourceDomain&) const = default;
};

enum class ResolveStatus {
  kOk,
  kIpLiteral,     // domain holds the address itself
  kPublicSuffix,  // host is a public suffix; unresolvable
  kInvalidUrl,
};

struct Resolution {
  ResolveStatus status = ResolveStatus::kInvalidUrl;
  SourceDomain source;

  bool resolved() const {
    return status == ResolveStatus::kOk || status == ResolveStatus::kIpLiteral;
  }
};

struct UrlParts {
  std::string scheme;  // "http" or "https"
  std::string host;    // as written, brackets removed for IPv6
  std::string port;
  std::string path;    // path, query and fragment
};

// Parses absolute http(s) URLs; anything else yields nullopt.
std::optional<UrlParts> parse_http_url(std::string_view url);

Resolution resolve_source(std::string_view url, const PslRuleSet& rules);

}  // namespace wikirel

#endif  // WIKIREL_PSL_H_
