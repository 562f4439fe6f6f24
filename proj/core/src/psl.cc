#include "wikirel/psl.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "wikirel/strings.h"

namespace wikirel {

namespace {

std::optional<std::u32string> decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (c < 0x80) {
      cp = c;
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      len = 4;
    } else {
      return std::nullopt;
    }
    if (i + len > s.size()) return std::nullopt;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return std::nullopt;
      cp = (cp << 6) | (cc & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

// Simple case folding for the scripts commonly found in host names.
char32_t fold_case(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xFF21 && c <= 0xFF3A) return c - 0xFF21 + 'a';  // fullwidth Latin
  if (c >= 0xFF10 && c <= 0xFF19) return c - 0xFF10 + '0';
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_label_char(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
}

bool is_dot(char32_t c) { return c == '.' || c == 0x3002 || c == 0xFF0E || c == 0xFF61; }

constexpr std::uint32_t kBase = 36, kTMin = 1, kTMax = 26, kSkew = 38, kDamp = 700;
constexpr std::uint32_t kInitialBias = 72, kInitialN = 128;

char encode_digit(std::uint32_t d) {
  return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
}

std::uint32_t adapt(std::uint32_t delta, std::uint32_t numpoints, bool first) {
  delta = first ? delta / kDamp : delta / 2;
  delta += delta / numpoints;
  std::uint32_t k = 0;
  while (delta > ((kBase - kTMin) * kTMax) / 2) {
    delta /= kBase - kTMin;
    k += kBase;
  }
  return k + (kBase - kTMin + 1) * delta / (delta + kSkew);
}

bool is_ipv4(std::string_view host) {
  int parts = 0;
  std::size_t start = 0;
  while (start <= host.size()) {
    std::size_t dot = host.find('.', start);
    if (dot == std::string_view::npos) dot = host.size();
    auto label = host.substr(start, dot - start);
    if (label.empty() || label.size() > 3) return false;
    int v = 0;
    for (char c : label) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + (c - '0');
    }
    if (v > 255) return false;
    ++parts;
    start = dot + 1;
  }
  return parts == 4;
}

}  // namespace

std::optional<std::string> punycode_encode(std::u32string_view input) {
  std::string out;
  std::uint32_t n = kInitialN, delta = 0, bias = kInitialBias;
  for (char32_t c : input) {
    if (c < 0x80) out.push_back(static_cast<char>(c));
  }
  const auto b = static_cast<std::uint32_t>(out.size());
  std::uint32_t h = b;
  if (b > 0) out.push_back('-');
  while (h < input.size()) {
    char32_t m = 0x10FFFF + 1;
    for (char32_t c : input) {
      if (c >= n && c < m) m = c;
    }
    if ((m - n) > (UINT32_MAX - delta) / (h + 1)) return std::nullopt;
    delta += (m - n) * (h + 1);
    n = m;
    for (char32_t c : input) {
      if (c < n && ++delta == 0) return std::nullopt;
      if (c == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = kBase;; k += kBase) {
          std::uint32_t t = k <= bias ? kTMin : (k >= bias + kTMax ? kTMax : k - bias);
          if (q < t) break;
          out.push_back(encode_digit(t + (q - t) % (kBase - t)));
          q = (q - t) / (kBase - t);
        }
        out.push_back(encode_digit(q));
        bias = adapt(delta, h + 1, h == b);
        delta = 0;
        ++h;
      }
    }
    ++delta;
    ++n;
  }
  return out;
}

std::optional<std::string> normalize_host(std::string_view raw) {
  std::string decoded = percent_decode(raw);
  auto cps = decode_utf8(decoded);
  if (!cps || cps->empty()) return std::nullopt;
  if (is_dot(cps->back())) cps->pop_back();
  if (cps->empty()) return std::nullopt;

  std::string host;
  std::u32string label;
  auto flush = [&]() -> bool {
    if (label.empty() || label.size() > 63) return false;
    bool ascii = true;
    for (char32_t& c : label) {
      c = fold_case(c);
      if (c >= 0x80) {
        ascii = false;
      } else if (!is_label_char(c)) {
        return false;
      }
    }
    if (!host.empty()) host.push_back('.');
    if (ascii) {
      for (char32_t c : label) host.push_back(static_cast<char>(c));
    } else {
      auto enc = punycode_encode(label);
      if (!enc) return false;
      host += "xn--" + *enc;
    }
    label.clear();
    return true;
  };
  for (char32_t c : *cps) {
    if (is_dot(c)) {
      if (!flush()) return std::nullopt;
    } else {
      label.push_back(c);
    }
  }
  if (!flush()) return std::nullopt;
  return host;
}

PslRuleSet PslRuleSet::parse(std::string_view text, bool include_private) {
  PslRuleSet rules;
  bool in_private = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with("//")) {
      if (t.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) in_private = true;
      if (t.find("===END PRIVATE DOMAINS===") != std::string_view::npos) in_private = false;
      continue;
    }
    if (in_private && !include_private) continue;
    std::size_t ws = 0;
    while (ws < t.size() && !is_ascii_space(t[ws])) ++ws;
    auto rule = t.substr(0, ws);
    if (rule.starts_with("!")) {
      if (auto h = normalize_host(rule.substr(1))) rules.exception_.insert(*h);
    } else if (rule.starts_with("*.")) {
      if (auto h = normalize_host(rule.substr(2))) rules.wildcard_.insert(*h);
    } else if (auto h = normalize_host(rule)) {
      rules.normal_.insert(*h);
    }
  }
  if (rules.normal_.empty() && rules.wildcard_.empty() && rules.exception_.empty()) {
    throw PslError("public suffix list contains no rules");
  }
  return rules;
}

PslRuleSet PslRuleSet::load(const std::filesystem::path& path, bool include_private) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PslError("cannot read public suffix list " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), include_private);
}

std::size_t PslRuleSet::suffix_label_count(std::string_view host) const {
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < host.size(); ++i) {
    if (host[i] == '.') starts.push_back(i + 1);
  }
  const std::size_t n = starts.size();
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    key.assign(host.substr(starts[i]));
    if (exception_.count(key)) return n - i - 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    key.assign(host.substr(starts[i]));
    if (normal_.count(key)) return n - i;
    if (i + 1 < n) {
      key.assign(host.substr(starts[i + 1]));
      if (wildcard_.count(key)) return n - i;
    }
  }
  return 1;
}

std::optional<std::string> registrable_domain(std::string_view raw, const PslRuleSet& rules) {
  auto host = normalize_host(raw);
  if (!host) return std::nullopt;
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < host->size(); ++i) {
    if ((*host)[i] == '.') starts.push_back(i + 1);
  }
  std::size_t suffix = rules.suffix_label_count(*host);
  if (starts.size() <= suffix) return std::nullopt;
  return host->substr(starts[starts.size() - suffix - 1]);
}

std::optional<UrlParts> parse_http_url(std::string_view url) {
  url = trim(url);
  std::size_t sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  UrlParts parts;
  parts.scheme = to_lower_ascii(url.substr(0, sep));
  if (parts.scheme != "http" && parts.scheme != "https") return std::nullopt;
  auto rest = url.substr(sep + 3);
  std::size_t auth_end = rest.find_first_of("/?#");
  if (auth_end == std::string_view::npos) auth_end = rest.size();
  auto authority = rest.substr(0, auth_end);
  parts.path = std::string(rest.substr(auth_end));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }
  std::string_view port;
  if (authority.starts_with("[")) {
    std::size_t close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    parts.host = to_lower_ascii(authority.substr(1, close - 1));
    auto tail = authority.substr(close + 1);
    if (!tail.empty()) {
      if (tail.front() != ':') return std::nullopt;
      port = tail.substr(1);
    }
  } else {
    std::size_t colon = authority.rfind(':');
    if (colon != std::string_view::npos) {
      port = authority.substr(colon + 1);
      authority = authority.substr(0, colon);
    }
    parts.host = std::string(authority);
  }
  for (char c : port) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  parts.port = std::string(port);
  if (parts.host.empty()) return std::nullopt;
  return parts;
}

Resolution resolve_source(std::string_view url, const PslRuleSet& rules) {
  Resolution r;
  auto parts = parse_http_url(url);
  if (!parts) return r;
  if (parts->host.find(':') != std::string::npos) {
    for (char c : parts->host) {
      bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || c == ':' || c == '.';
      if (!hex) return r;
    }
    r.status = ResolveStatus::kIpLiteral;
    r.source.domain = parts->host;
    return r;
  }
  auto host = normalize_host(parts->host);
  if (!host) return r;
  if (is_ipv4(*host)) {
    r.status = ResolveStatus::kIpLiteral;
    r.source.domain = *host;
    return r;
  }
  auto domain = registrable_domain(*host, rules);
  if (!domain) {
    r.status = ResolveStatus::kPublicSuffix;
    r.source.domain = *host;
    return r;
  }
  r.status = ResolveStatus::kOk;
  r.source.domain = *domain;
  return r;
}

}  // namespace wikirel
