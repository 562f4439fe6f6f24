#include <algorithm>
#include <map>

#include "wikirel/strings.h"
#include "wikirel/wikitext.h"

namespace wikirel {

namespace {

struct RefTag {
  std::size_t begin = 0;       // '<' of the opening tag
  std::size_t end = 0;         // one past the closing tag (or the cut point)
  std::size_t body_begin = 0;
  std::size_t body_end = 0;
  bool self_closing = false;
  std::optional<std::string> name;
  std::optional<std::string> group;
};

bool is_ref_opener(std::string_view text, std::size_t i) {
  if (!istarts_with(text.substr(i), "<ref")) return false;
  if (i + 4 >= text.size()) return false;
  char c = text[i + 4];
  return c == '>' || c == '/' || is_ascii_space(c);
}

std::size_t next_ref_opener(std::string_view text, std::size_t from) {
  std::size_t i = from;
  while ((i = ifind(text, "<ref", i)) != std::string_view::npos) {
    if (is_ref_opener(text, i)) return i;
    i += 4;
  }
  return std::string_view::npos;
}

// Position of '>' closing the tag that starts at `from`, honouring quotes.
std::size_t tag_end(std::string_view text, std::size_t from) {
  char quote = 0;
  for (std::size_t i = from; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '>') {
      return i;
    } else if (c == '<') {
      return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

void parse_attributes(std::string_view attrs, RefTag& tag) {
  std::size_t i = 0;
  while (i < attrs.size()) {
    while (i < attrs.size() && (is_ascii_space(attrs[i]) || attrs[i] == '/')) ++i;
    std::size_t key_begin = i;
    while (i < attrs.size() && attrs[i] != '=' && !is_ascii_space(attrs[i])) ++i;
    std::string key = to_lower_ascii(attrs.substr(key_begin, i - key_begin));
    while (i < attrs.size() && is_ascii_space(attrs[i])) ++i;
    if (i >= attrs.size() || attrs[i] != '=') {
      if (key.empty()) ++i;
      continue;
    }
    ++i;
    while (i < attrs.size() && is_ascii_space(attrs[i])) ++i;
    std::string value;
    if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
      char q = attrs[i++];
      std::size_t close = attrs.find(q, i);
      if (close == std::string_view::npos) close = attrs.size();
      value = std::string(attrs.substr(i, close - i));
      i = close + 1;
    } else {
      std::size_t vb = i;
      while (i < attrs.size() && !is_ascii_space(attrs[i])) ++i;
      value = std::string(attrs.substr(vb, i - vb));
    }
    value = std::string(trim(value));
    if (key == "name" && !value.empty()) tag.name = value;
    if (key == "group" && !value.empty()) tag.group = value;
  }
}

std::vector<RefTag> scan_ref_tags(std::string_view text, Diagnostics& diags) {
  std::vector<RefTag> tags;
  std::size_t i = 0;
  while ((i = next_ref_opener(text, i)) != std::string_view::npos) {
    std::size_t gt = tag_end(text, i + 4);
    if (gt == std::string_view::npos) {
      diags.push_back({"malformed-ref-tag", "opening <ref tag is never closed", i});
      i += 4;
      continue;
    }
    RefTag tag;
    tag.begin = i;
    std::size_t attr_end = gt;
    std::size_t last = gt;
    while (last > i + 4 && is_ascii_space(text[last - 1])) --last;
    if (last > i + 4 && text[last - 1] == '/') {
      tag.self_closing = true;
      attr_end = last - 1;
    }
    parse_attributes(text.substr(i + 4, attr_end - (i + 4)), tag);
    if (tag.self_closing) {
      tag.end = gt + 1;
      tag.body_begin = tag.body_end = gt + 1;
      tags.push_back(std::move(tag));
      i = gt + 1;
      continue;
    }
    tag.body_begin = gt + 1;
    std::size_t next_open = next_ref_opener(text, tag.body_begin);
    std::size_t close = tag.body_begin;
    std::size_t close_gt = std::string_view::npos;
    while ((close = ifind(text, "</ref", close)) != std::string_view::npos) {
      std::size_t j = close + 5;
      while (j < text.size() && is_ascii_space(text[j])) ++j;
      if (j < text.size() && text[j] == '>') {
        close_gt = j;
        break;
      }
      close += 5;
    }
    if (close != std::string_view::npos &&
        (next_open == std::string_view::npos || close < next_open)) {
      tag.body_end = close;
      tag.end = close_gt + 1;
    } else {
      std::size_t cut = next_open == std::string_view::npos ? text.size() : next_open;
      diags.push_back({"unclosed-ref", "<ref> closed implicitly", tag.begin});
      tag.body_end = cut;
      tag.end = cut;
    }
    i = tag.end;
    tags.push_back(std::move(tag));
  }
  return tags;
}

struct UrlSet {
  std::vector<std::string> urls;
  std::optional<std::string> via_template;
};

void add_unique(std::vector<std::string>& urls, std::string url) {
  if (std::find(urls.begin(), urls.end(), url) == urls.end()) urls.push_back(std::move(url));
}

std::vector<std::pair<std::size_t, std::string>> citation_urls(
    const TemplateCall& call, const CitationConfig& config) {
  std::vector<std::pair<std::size_t, std::string>> out;
  for (const auto& p : call.params) {
    if (!config.url_parameters.count(p.name)) continue;
    if (auto url = url_from_param_value(p.value)) out.emplace_back(p.value_begin, *url);
  }
  return out;
}

bool is_citation(const TemplateCall& call, const CitationConfig& config) {
  return config.citation_templates.count(call.name) > 0;
}

UrlSet body_urls(std::string_view masked, std::size_t begin, std::size_t end,
                 const std::vector<TemplateCall>& calls, const CitationConfig& config) {
  UrlSet set;
  std::vector<std::pair<std::size_t, std::string>> found;
  std::string rest(masked.substr(begin, end - begin));
  auto first = std::lower_bound(calls.begin(), calls.end(), begin,
                                [](const TemplateCall& c, std::size_t pos) { return c.begin < pos; });
  for (auto it = first; it != calls.end() && it->begin < end; ++it) {
    const auto& call = *it;
    if (call.end > end || !is_citation(call, config)) continue;
    if (!set.via_template) set.via_template = call.name;
    auto urls = citation_urls(call, config);
    found.insert(found.end(), urls.begin(), urls.end());
    std::fill(rest.begin() + (call.begin - begin), rest.begin() + (call.end - begin), ' ');
  }
  for (auto& m : find_urls(rest)) found.emplace_back(begin + m.offset, std::move(m.url));
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [pos, url] : found) add_unique(set.urls, std::move(url));
  return set;
}

bool inside_any(const std::vector<RefTag>& tags, std::size_t begin, std::size_t end) {
  auto it = std::upper_bound(tags.begin(), tags.end(), begin,
                             [](std::size_t pos, const RefTag& t) { return pos < t.begin; });
  if (it == tags.begin()) return false;
  const RefTag& t = *std::prev(it);
  return begin >= t.body_begin && end <= t.body_end && t.body_begin < t.body_end;
}

CitationConfig canonicalized(const CitationConfig& config) {
  CitationConfig c = config;
  c.citation_templates.clear();
  for (const auto& name : config.citation_templates) {
    auto canon = canonical_template_name(name);
    if (!canon.empty()) c.citation_templates.insert(canon);
  }
  return c;
}

void sort_by_offset(std::vector<ReferenceOccurrence>& occ) {
  std::stable_sort(occ.begin(), occ.end(), [](const auto& a, const auto& b) {
    return a.byte_offset < b.byte_offset;
  });
}

}  // namespace

CitationConfig CitationConfig::defaults() {
  CitationConfig c;
  c.citation_templates = {"Cite web",     "Cite news", "Cite book",
                          "Cite journal", "NHLE",      "Cite magazine"};
  c.url_parameters = {"url", "URL", "website"};
  return c;
}

ExtractionResult extract_references(std::string_view expanded,
                                    const CitationConfig& raw_config) {
  ExtractionResult result;
  if (expanded.empty()) return result;
  const CitationConfig config = canonicalized(raw_config);
  const std::string masked = mask_comments_and_nowiki(expanded);
  const auto calls = find_template_calls(masked);
  const auto tags = scan_ref_tags(masked, result.diagnostics);

  auto counted = [&](const RefTag& t) { return config.include_grouped_refs || !t.group; };
  auto has_body = [&](const RefTag& t) {
    return !t.self_closing &&
           !trim(std::string_view(masked).substr(t.body_begin, t.body_end - t.body_begin))
                .empty();
  };

  // Named definitions, wherever they appear; the first one wins.
  std::map<std::pair<std::string, std::string>, UrlSet> definitions;
  for (const auto& t : tags) {
    if (!t.name || !has_body(t)) continue;
    auto key = std::make_pair(t.group.value_or(""), *t.name);
    if (definitions.count(key)) continue;
    definitions.emplace(key, body_urls(masked, t.body_begin, t.body_end, calls, config));
  }

  for (const auto& t : tags) {
    if (!counted(t)) continue;
    ReferenceOccurrence occ;
    occ.in_ref_tag = true;
    occ.byte_offset = t.begin;
    occ.ref_name = t.name;
    if (has_body(t)) {
      // A conflicting redefinition still shows its own body.
      auto set = body_urls(masked, t.body_begin, t.body_end, calls, config);
      occ.urls = std::move(set.urls);
      occ.via_template = std::move(set.via_template);
    } else if (t.name) {
      auto it = definitions.find({t.group.value_or(""), *t.name});
      if (it == definitions.end()) {
        occ.undefined_name = true;
        result.diagnostics.push_back(
            {"undefined-ref-name", "reuse of undefined reference name \"" + *t.name + "\"",
             t.begin});
      } else {
        occ.urls = it->second.urls;
        occ.via_template = it->second.via_template;
      }
    } else {
      result.diagnostics.push_back({"empty-ref", "reference without name or body", t.begin});
      continue;
    }
    result.occurrences.push_back(std::move(occ));
  }

  for (const auto& call : calls) {
    if (!is_citation(call, config) || inside_any(tags, call.begin, call.end)) continue;
    ReferenceOccurrence occ;
    occ.via_template = call.name;
    occ.byte_offset = call.begin;
    for (auto& [pos, url] : citation_urls(call, config)) add_unique(occ.urls, std::move(url));
    result.occurrences.push_back(std::move(occ));
  }

  sort_by_offset(result.occurrences);
  return result;
}

std::vector<ReferenceOccurrence> extract_nonref_sources(std::string_view expanded,
                                                        const SourceAllowlist& allowlist) {
  std::vector<ReferenceOccurrence> out;
  if (allowlist.empty() || expanded.empty()) return out;
  std::set<std::pair<std::string, std::string>> allowed;
  for (const auto& [tmpl, param] : allowlist) {
    auto canon = canonical_template_name(tmpl);
    if (!canon.empty()) allowed.emplace(canon, param);
  }
  const std::string masked = mask_comments_and_nowiki(expanded);
  Diagnostics ignored;
  const auto tags = scan_ref_tags(masked, ignored);
  for (const auto& call : find_template_calls(masked)) {
    if (inside_any(tags, call.begin, call.end)) continue;
    for (const auto& p : call.params) {
      if (!allowed.count({call.name, p.name})) continue;
      ReferenceOccurrence occ;
      occ.via_template = call.name;
      occ.byte_offset = call.begin;
      for (auto& m : find_urls(p.value)) add_unique(occ.urls, std::move(m.url));
      if (!occ.urls.empty()) out.push_back(std::move(occ));
    }
  }
  sort_by_offset(out);
  return out;
}

ExtractionResult extract_revision(const RevisionText& rev, const TemplateStore& store,
                                  const ExtractionSettings& settings) {
  std::set<std::string> opaque;
  for (const auto& name : settings.citations.citation_templates) {
    if (auto c = canonical_template_name(name); !c.empty()) opaque.insert(store.resolve_name(c));
  }
  for (const auto& [name, param] : settings.allowlist) {
    if (auto c = canonical_template_name(name); !c.empty()) opaque.insert(store.resolve_name(c));
  }
  auto expanded = expand_transclusions(rev, store, settings.max_depth, opaque);
  auto result = extract_references(expanded.text, settings.citations);
  auto extra = extract_nonref_sources(expanded.text, settings.allowlist);
  result.occurrences.insert(result.occurrences.end(), std::make_move_iterator(extra.begin()),
                            std::make_move_iterator(extra.end()));
  sort_by_offset(result.occurrences);
  result.diagnostics.insert(result.diagnostics.begin(), expanded.diagnostics.begin(),
                            expanded.diagnostics.end());
  return result;
}

}  // namespace wikirel
