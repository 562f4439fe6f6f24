#include "wikirel/wikimarkup.h"

#include <algorithm>
#include <array>

#include "wikirel/strings.h"

namespace wikirel {

namespace {

struct OpenRun {
  std::size_t pos;    // first brace of the run
  std::size_t count;  // braces still unmatched
};

struct FlatNode {
  BraceKind kind;
  std::size_t begin;
  std::size_t end;
};

void nest(std::vector<FlatNode>& flat, std::vector<BraceNode>& roots) {
  std::sort(flat.begin(), flat.end(), [](const FlatNode& a, const FlatNode& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end > b.end;
  });
  // Path from the root to the node currently open.
  std::vector<BraceNode*> path;
  for (const auto& f : flat) {
    while (!path.empty() && path.back()->end <= f.begin) path.pop_back();
    BraceNode node{f.kind, f.begin, f.end, {}};
    auto& siblings = path.empty() ? roots : path.back()->children;
    siblings.push_back(std::move(node));
    path.push_back(&siblings.back());
  }
}

bool is_url_terminator(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u <= 0x20 || u == 0x7f) return true;
  switch (c) {
    case '[': case ']': case '<': case '>': case '"':
    case '{': case '}': case '|':
      return true;
    default:
      return false;
  }
}

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Template namespace names of the editions the pipeline ships defaults for.
constexpr std::array<std::string_view, 16> kTemplateNamespaces = {
    "Template:", "Vorlage:", "Modèle:", "Plantilla:", "Predefinição:",
    "Modello:",  "Sjabloon:", "Szablon:", "Mall:", "Шаблон:", "قالب:",
    "模板:", "Bản mẫu:", "テンプレート:", "Predefinicao:", "Tpl:"};

std::string_view strip_prefix_ci(std::string_view s, std::string_view prefix) {
  if (istarts_with(s, prefix)) return trim(s.substr(prefix.size()));
  return s;
}

}  // namespace

std::vector<BraceNode> parse_braces(std::string_view text) {
  std::vector<OpenRun> stack;
  std::vector<FlatNode> flat;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '{') {
      std::size_t j = i;
      while (j < n && text[j] == '{') ++j;
      if (j - i >= 2) stack.push_back({i, j - i});
      i = j;
      continue;
    }
    if (c == '}' && !stack.empty()) {
      std::size_t j = i;
      while (j < n && text[j] == '}') ++j;
      std::size_t remaining = j - i;
      std::size_t at = i;
      while (remaining >= 2 && !stack.empty()) {
        OpenRun& top = stack.back();
        std::size_t avail = std::min(top.count, remaining);
        std::size_t matched = avail >= 3 ? 3 : 2;
        BraceKind kind = matched == 3 ? BraceKind::kParameter : BraceKind::kTemplate;
        std::size_t begin = top.pos + top.count - matched;
        flat.push_back({kind, begin, at + matched});
        at += matched;
        remaining -= matched;
        top.count -= matched;
        if (top.count < 2) stack.pop_back();
      }
      i = j;
      continue;
    }
    ++i;
  }
  std::vector<BraceNode> roots;
  nest(flat, roots);
  return roots;
}

std::vector<std::pair<std::size_t, std::size_t>> split_pipes(
    std::string_view text, const BraceNode& node) {
  std::vector<std::pair<std::size_t, std::size_t>> parts;
  const std::size_t end = node.inner_end();
  std::size_t start = node.inner_begin();
  std::size_t child = 0;
  int link_depth = 0;
  std::size_t i = start;
  while (i < end) {
    if (child < node.children.size() && node.children[child].begin == i) {
      i = node.children[child].end;
      ++child;
      continue;
    }
    if (i + 1 < end && text[i] == '[' && text[i + 1] == '[') {
      ++link_depth;
      i += 2;
      continue;
    }
    if (i + 1 < end && text[i] == ']' && text[i + 1] == ']' && link_depth > 0) {
      --link_depth;
      i += 2;
      continue;
    }
    if (text[i] == '|' && link_depth == 0) {
      parts.emplace_back(start, i);
      start = i + 1;
    }
    ++i;
  }
  parts.emplace_back(start, end);
  return parts;
}

std::size_t find_top_level_equals(std::string_view text, const BraceNode& node,
                                  std::size_t begin, std::size_t end) {
  std::size_t child = 0;
  while (child < node.children.size() && node.children[child].end <= begin) ++child;
  std::size_t i = begin;
  int link_depth = 0;
  while (i < end) {
    if (child < node.children.size() && node.children[child].begin == i) {
      i = node.children[child].end;
      ++child;
      continue;
    }
    if (i + 1 < end && text[i] == '[' && text[i + 1] == '[') {
      ++link_depth;
      i += 2;
      continue;
    }
    if (i + 1 < end && text[i] == ']' && text[i + 1] == ']' && link_depth > 0) {
      --link_depth;
      i += 2;
      continue;
    }
    if (text[i] == '=' && link_depth == 0) return i;
    ++i;
  }
  return std::string_view::npos;
}

std::string mask_comments_and_nowiki(std::string_view text) {
  std::string out(text);
  std::size_t i = 0;
  while ((i = out.find('<', i)) != std::string::npos) {
    std::string_view rest(out.data() + i, out.size() - i);
    if (rest.starts_with("<!--")) {
      std::size_t close = out.find("-->", i + 4);
      std::size_t stop = close == std::string::npos ? out.size() : close + 3;
      std::fill(out.begin() + i, out.begin() + stop, ' ');
      i = stop;
      continue;
    }
    if (istarts_with(rest, "<nowiki")) {
      std::size_t gt = out.find('>', i);
      if (gt == std::string::npos) break;
      bool self_closing = gt > i && out[gt - 1] == '/';
      std::size_t stop = gt + 1;
      if (!self_closing) {
        std::size_t close = ifind(out, "</nowiki", gt + 1);
        if (close == std::string::npos) {
          stop = out.size();
        } else {
          std::size_t cgt = out.find('>', close);
          stop = cgt == std::string::npos ? out.size() : cgt + 1;
        }
      }
      std::fill(out.begin() + i, out.begin() + stop, ' ');
      i = stop;
      continue;
    }
    ++i;
  }
  return out;
}

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t open = text.find("<!--", i);
    if (open == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, open - i));
    std::size_t close = text.find("-->", open + 4);
    if (close == std::string_view::npos) break;
    i = close + 3;
  }
  return out;
}

std::string canonical_template_name(std::string_view raw) {
  std::string_view name = trim(raw);
  if (name.empty() || name.front() == '#') return {};
  if (name.find_first_of("{}<>[]|") != std::string_view::npos) return {};
  for (std::string_view p : {"safesubst:", "subst:", "msgnw:"}) name = strip_prefix_ci(name, p);
  for (std::string_view ns : kTemplateNamespaces) name = strip_prefix_ci(name, ns);
  if (name.empty() || name.front() == ':') return {};
  return normalize_title(name);
}

const TemplateParam* TemplateCall::param(std::string_view key) const {
  for (const auto& p : params) {
    if (p.name == key) return &p;
  }
  return nullptr;
}

namespace {

void collect_calls(std::string_view text, const std::vector<BraceNode>& nodes,
                   std::vector<TemplateCall>& out) {
  for (const auto& node : nodes) {
    if (node.kind == BraceKind::kTemplate) {
      auto parts = split_pipes(text, node);
      TemplateCall call;
      call.name = canonical_template_name(
          text.substr(parts[0].first, parts[0].second - parts[0].first));
      call.begin = node.begin;
      call.end = node.end;
      if (!call.name.empty()) {
        int positional = 0;
        for (std::size_t k = 1; k < parts.size(); ++k) {
          auto [b, e] = parts[k];
          std::size_t eq = find_top_level_equals(text, node, b, e);
          TemplateParam p;
          if (eq != std::string_view::npos) {
            p.name = std::string(trim(text.substr(b, eq - b)));
            auto raw = text.substr(eq + 1, e - eq - 1);
            auto value = trim(raw);
            p.value = std::string(value);
            p.value_begin = value.empty() ? eq + 1
                                          : static_cast<std::size_t>(value.data() - text.data());
          } else {
            p.name = std::to_string(++positional);
            auto value = trim(text.substr(b, e - b));
            p.value = std::string(value);
            p.value_begin = value.empty() ? b : static_cast<std::size_t>(value.data() - text.data());
          }
          call.params.push_back(std::move(p));
        }
        out.push_back(std::move(call));
      }
    }
    collect_calls(text, node.children, out);
  }
}

}  // namespace

std::vector<TemplateCall> find_template_calls(std::string_view text) {
  return find_template_calls(text, parse_braces(text));
}

std::vector<TemplateCall> find_template_calls(std::string_view text,
                                              const std::vector<BraceNode>& nodes) {
  std::vector<TemplateCall> calls;
  collect_calls(text, nodes, calls);
  return calls;
}

std::vector<UrlMatch> find_urls(std::string_view text) {
  std::vector<UrlMatch> out;
  std::size_t i = 0;
  while ((i = ifind(text, "http", i)) != std::string_view::npos) {
    std::size_t scheme_len = 0;
    if (istarts_with(text.substr(i), "https://")) {
      scheme_len = 8;
    } else if (istarts_with(text.substr(i), "http://")) {
      scheme_len = 7;
    }
    bool boundary = i == 0 || !is_alnum(text[i - 1]);
    if (scheme_len == 0 || !boundary) {
      i += 4;
      continue;
    }
    std::size_t j = i + scheme_len;
    if (j >= text.size() || is_url_terminator(text[j]) || text[j] == '/') {
      i = j;
      continue;
    }
    while (j < text.size() && !is_url_terminator(text[j])) {
      if (text[j] == '\'' && j + 1 < text.size() && text[j + 1] == '\'') break;
      ++j;
    }
    std::string_view url = text.substr(i, j - i);
    while (url.size() > scheme_len + 1) {
      char last = url.back();
      if (last == ',' || last == ';' || last == '.' || last == ':' ||
          last == '!' || last == '?' || last == '\'') {
        url.remove_suffix(1);
      } else if (last == ')' && url.find('(') == std::string_view::npos) {
        url.remove_suffix(1);
      } else {
        break;
      }
    }
    out.push_back({i, std::string(url)});
    i = j;
  }
  return out;
}

std::optional<std::string> url_from_param_value(std::string_view value) {
  value = trim(value);
  auto urls = find_urls(value);
  if (!urls.empty()) return urls.front().url;
  if (value.starts_with("//") && value.size() > 2 && !is_url_terminator(value[2])) {
    std::size_t end = 2;
    while (end < value.size() && !is_url_terminator(value[end])) ++end;
    return "https:" + std::string(value.substr(0, end));
  }
  return std::nullopt;
}

}  // namespace wikirel
