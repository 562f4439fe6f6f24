#ifndef WIKIREL_WIKITEXT_H_
#define WIKIREL_WIKITEXT_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wikirel/dates.h"
#include "wikirel/diagnostics.h"
#include "wikirel/wikimarkup.h"

namespace wikirel {

// One revision of one article, as stored in dumps or returned by the API.
struct RevisionText {
  std::string article_id;
  std::string language;
  Timestamp timestamp{};
  std::string wikitext;
};

// One citation placed in a revision.
struct ReferenceOccurrence {
  std::vector<std::string> urls;
  std::optional<std::string> ref_name;
  std::optional<std::string> via_template;
  bool in_ref_tag = false;
  std::size_t byte_offset = 0;
  // Set on a `<ref name=.../>` reuse whose name is never defined.
  bool undefined_name = false;

  bool operator==(const ReferenceOccurrence&) const = default;
};

// Dated revisions of templates, used to expand transclusions the way they
// rendered at the time of an article revision.
class TemplateStore {
 public:
  struct Revision {
    Timestamp timestamp{};
    std::string text;               // comments and <noinclude> removed
    std::vector<BraceNode> braces;  // parsed once at build time
  };

  class Builder {
   public:
    Builder& add_revision(std::string_view name, Timestamp ts, std::string text);
    // `alias` transcludes as `target`. Chains are closed on build().
    Builder& add_alias(std::string_view alias, std::string_view target);
    // Throws std::invalid_argument if the alias map has a cycle.
    TemplateStore build() &&;

   private:
    std::map<std::string, std::vector<std::pair<Timestamp, std::string>>> revisions_;
    std::map<std::string, std::string> aliases_;
  };

  TemplateStore() = default;

  // Canonical name after alias resolution; empty if the name is not a
  // template name at all.
  std::string resolve_name(std::string_view raw) const;
  bool contains(std::string_view raw) const;
  // Latest revision with timestamp <= at, or nullptr.
  const Revision* revision_at(std::string_view raw, Timestamp at) const;

  std::size_t template_count() const { return revisions_.size(); }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }

 private:
  std::map<std::string, std::vector<Revision>> revisions_;
  std::map<std::string, std::string> aliases_;
};

// Applies <noinclude>/<includeonly>/<onlyinclude> semantics and removes
// comments, giving the text a template contributes when transcluded.
std::string transcluded_body(std::string_view template_source);

inline constexpr int kDefaultMaxDepth = 5;

struct ExpansionResult {
  std::string text;
  Diagnostics diagnostics;
};

// Replaces every transclusion of a stored template with the revision that was
// current at rev.timestamp, substituting {{{param|default}}} references, up to
// max_depth nested levels. Templates not in the store, parser functions and
// templates with no revision yet are kept verbatim (their arguments are still
// expanded). Templates named in `opaque` (canonical names) are never expanded;
// they are emitted under their alias-resolved name.
ExpansionResult expand_transclusions(const RevisionText& rev,
                                     const TemplateStore& store,
                                     int max_depth = kDefaultMaxDepth,
                                     const std::set<std::string>& opaque = {});

struct CitationConfig {
  std::set<std::string> citation_templates;  // canonical names
  std::set<std::string> url_parameters;
  // Whether <ref group="..."> footnotes are counted.
  bool include_grouped_refs = true;

  // Cite web, Cite news, Cite book, Cite journal, NHLE and Cite magazine with
  // url parameters {url, URL, website}; archive parameters are not read.
  static CitationConfig defaults();
};

struct ExtractionResult {
  std::vector<ReferenceOccurrence> occurrences;
  Diagnostics diagnostics;
};

ExtractionResult extract_references(std::string_view expanded,
                                    const CitationConfig& config);

// (template name, parameter name) pairs whose URLs count as sources even
// though they are not references.
using SourceAllowlist = std::set<std::pair<std::string, std::string>>;

std::vector<ReferenceOccurrence> extract_nonref_sources(std::string_view expanded,
                                                        const SourceAllowlist& allowlist);

struct ExtractionSettings {
  CitationConfig citations = CitationConfig::defaults();
  SourceAllowlist allowlist;
  int max_depth = kDefaultMaxDepth;
};

// Expansion followed by both extractors; occurrences ordered by offset.
ExtractionResult extract_revision(const RevisionText& rev, const TemplateStore& store,
                                  const ExtractionSettings& settings);

}  // namespace wikirel

#endif  // WIKIREL_WIKITEXT_H_
