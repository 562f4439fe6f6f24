#include <map>

#include "wikirel/strings.h"
#include "wikirel/wikitext.h"

namespace wikirel {

namespace {

using Args = std::map<std::string, std::string, std::less<>>;

// Target of a "#REDIRECT [[Template:X]]" body, if the body is a redirect.
std::optional<std::string> redirect_target(std::string_view body) {
  body = trim(body);
  if (!istarts_with(body, "#redirect")) return std::nullopt;
  std::size_t open = body.find("[[");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t close = body.find("]]", open + 2);
  if (close == std::string_view::npos) return std::nullopt;
  auto target = body.substr(open + 2, close - open - 2);
  if (auto bar = target.find('|'); bar != std::string_view::npos) target = target.substr(0, bar);
  return std::string(trim(target));
}

class Expander {
 public:
  Expander(const TemplateStore& store, Timestamp at, int max_depth,
           const std::set<std::string>& opaque, Diagnostics& diags)
      : store_(store), at_(at), max_depth_(max_depth), opaque_(opaque), diags_(diags) {}

  void expand_range(std::string_view text, const std::vector<BraceNode>& nodes,
                    std::size_t begin, std::size_t end, const Args* args, int depth,
                    std::string& out) {
    std::size_t pos = begin;
    for (const auto& node : nodes) {
      if (node.end <= begin) continue;
      if (node.begin >= end) break;
      out.append(text.substr(pos, node.begin - pos));
      expand_node(text, node, args, depth, out);
      pos = node.end;
    }
    if (pos < end) out.append(text.substr(pos, end - pos));
  }

 private:
  std::string expand_to_string(std::string_view text, const BraceNode& node,
                               std::size_t begin, std::size_t end, const Args* args,
                               int depth) {
    std::string s;
    expand_range(text, node.children, begin, end, args, depth, s);
    return s;
  }

  void verbatim(std::string_view text, const BraceNode& node, const Args* args, int depth,
                std::string& out) {
    const char* open = node.kind == BraceKind::kTemplate ? "{{" : "{{{";
    const char* close = node.kind == BraceKind::kTemplate ? "}}" : "}}}";
    out.append(open);
    expand_range(text, node.children, node.inner_begin(), node.inner_end(), args, depth, out);
    out.append(close);
  }

  void expand_node(std::string_view text, const BraceNode& node, const Args* args,
                   int depth, std::string& out) {
    if (node.kind == BraceKind::kParameter) {
      expand_parameter(text, node, args, depth, out);
    } else {
      expand_template(text, node, args, depth, out);
    }
  }

  void expand_parameter(std::string_view text, const BraceNode& node, const Args* args,
                        int depth, std::string& out) {
    if (args == nullptr) {
      verbatim(text, node, args, depth, out);
      return;
    }
    auto parts = split_pipes(text, node);
    std::string name(trim(expand_to_string(text, node, parts[0].first, parts[0].second,
                                           args, depth)));
    if (auto it = args->find(name); it != args->end()) {
      out.append(it->second);
    } else if (parts.size() > 1) {
      expand_range(text, node.children, parts[1].first, parts[1].second, args, depth, out);
    } else {
      out.append("{{{").append(name).append("}}}");
    }
  }

  void expand_template(std::string_view text, const BraceNode& node, const Args* args,
                       int depth, std::string& out) {
    auto parts = split_pipes(text, node);
    std::string raw_name =
        expand_to_string(text, node, parts[0].first, parts[0].second, args, depth);
    std::string name = store_.resolve_name(raw_name);
    if (!name.empty() && opaque_.count(name)) {
      // Kept as a call, under its canonical name so aliases are recognized.
      out.append("{{").append(name);
      expand_range(text, node.children, parts[0].second, node.inner_end(), args, depth, out);
      out.append("}}");
      return;
    }
    if (name.empty() || !store_.contains(name)) {
      verbatim(text, node, args, depth, out);
      return;
    }
    const TemplateStore::Revision* rev = store_.revision_at(name, at_);
    if (rev == nullptr) {
      diags_.push_back({"template-not-yet-existing",
                        "no revision of " + name + " at " + format_timestamp(at_),
                        node.begin});
      verbatim(text, node, args, depth, out);
      return;
    }

    // Follow template redirects; each hop consumes a level.
    int level = depth;
    while (auto target = redirect_target(rev->text)) {
      const TemplateStore::Revision* next = store_.revision_at(*target, at_);
      if (next == nullptr || level + 1 >= max_depth_) break;
      rev = next;
      ++level;
    }

    if (level >= max_depth_) {
      diags_.push_back({"depth-exceeded",
                        "transclusion of " + name + " deeper than " +
                            std::to_string(max_depth_),
                        node.begin});
      verbatim(text, node, args, depth, out);
      return;
    }

    Args call_args;
    int positional = 0;
    for (std::size_t k = 1; k < parts.size(); ++k) {
      auto [b, e] = parts[k];
      std::size_t eq = find_top_level_equals(text, node, b, e);
      if (eq != std::string_view::npos) {
        std::string key(trim(expand_to_string(text, node, b, eq, args, depth)));
        std::string value(trim(expand_to_string(text, node, eq + 1, e, args, depth)));
        call_args[key] = std::move(value);
      } else {
        call_args[std::to_string(++positional)] = expand_to_string(text, node, b, e, args, depth);
      }
    }
    expand_range(rev->text, rev->braces, 0, rev->text.size(), &call_args, level + 1, out);
  }

  const TemplateStore& store_;
  Timestamp at_;
  int max_depth_;
  const std::set<std::string>& opaque_;
  Diagnostics& diags_;
};

}  // namespace

ExpansionResult expand_transclusions(const RevisionText& rev, const TemplateStore& store,
                                     int max_depth, const std::set<std::string>& opaque) {
  ExpansionResult result;
  if (max_depth < 0) max_depth = 0;
  if (rev.wikitext.find("{{") == std::string::npos) {
    result.text = rev.wikitext;
    return result;
  }
  std::string source = strip_comments(rev.wikitext);
  auto nodes = parse_braces(source);
  Expander expander(store, rev.timestamp, max_depth, opaque, result.diagnostics);
  result.text.reserve(source.size());
  expander.expand_range(source, nodes, 0, source.size(), nullptr, 0, result.text);
  return result;
}

}  // namespace wikirel
