#ifndef WIKIREL_WIKIMARKUP_H_
#define WIKIREL_WIKIMARKUP_H_

// Low-level wikitext scanning shared by transclusion, reference extraction
// and infobox matching.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wikirel {

enum class BraceKind { kTemplate, kParameter };

// A matched `{{...}}` or `{{{...}}}` span. [begin, end) covers the braces.
struct BraceNode {
  BraceKind kind = BraceKind::kTemplate;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<BraceNode> children;

  std::size_t inner_begin() const {
    return begin + (kind == BraceKind::kTemplate ? 2 : 3);
  }
  std::size_t inner_end() const {
    return end - (kind == BraceKind::kTemplate ? 2 : 3);
  }
};

// Matches brace runs the way the MediaWiki preprocessor does: a closing run
// pairs with the most recent opening run, three braces form a parameter and
// two a template. Unmatched braces are literal text and produce no node.
std::vector<BraceNode> parse_braces(std::string_view text);

// Splits the inner range of `node` at top-level '|' characters, i.e. pipes
// that are not inside a child node or a [[...]] link. Returns ranges into the
// original text.
std::vector<std::pair<std::size_t, std::size_t>> split_pipes(
    std::string_view text, const BraceNode& node);

// Position of the first top-level '=' in [begin, end), or npos.
std::size_t find_top_level_equals(std::string_view text, const BraceNode& node,
                                  std::size_t begin, std::size_t end);

// Returns a copy of `text` with HTML comments and <nowiki>...</nowiki> spans
// replaced by spaces, so offsets into the copy are offsets into `text`.
// An unterminated comment runs to the end of the text.
std::string mask_comments_and_nowiki(std::string_view text);

// Removes HTML comments entirely.
std::string strip_comments(std::string_view text);

// Canonical template name: optional "Template:"/"subst:" prefixes dropped,
// underscores to spaces, whitespace collapsed, first letter upper-cased.
// Returns an empty string for names that cannot be templates (parser
// functions such as "#if:", empty names, names containing braces).
std::string canonical_template_name(std::string_view raw);

struct TemplateParam {
  // Named parameters keep their (trimmed) name; positional ones are numbered
  // "1", "2", ...
  std::string name;
  std::string value;  // trimmed
  std::size_t value_begin = 0;
};

struct TemplateCall {
  std::string name;  // canonical
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<TemplateParam> params;

  const TemplateParam* param(std::string_view name) const;
};

// Every template call at every nesting level, ordered by begin offset.
std::vector<TemplateCall> find_template_calls(std::string_view text);
std::vector<TemplateCall> find_template_calls(std::string_view text,
                                              const std::vector<BraceNode>& nodes);

struct UrlMatch {
  std::size_t offset = 0;
  std::string url;
};

// Bare http:// and https:// links, in order of appearance.
std::vector<UrlMatch> find_urls(std::string_view text);

// The URL carried by a citation parameter value: the first link in it, or a
// protocol-relative "//host/..." value promoted to https.
std::optional<std::string> url_from_param_value(std::string_view value);

}  // namespace wikirel

#endif  // WIKIREL_WIKIMARKUP_H_
