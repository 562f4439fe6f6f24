#include <algorithm>
#include <stdexcept>

#include "wikirel/strings.h"
#include "wikirel/wikitext.h"

namespace wikirel {

namespace {

// Removes every <tag>...</tag> block; an unterminated block runs to the end.
std::string remove_blocks(std::string_view text, std::string_view tag) {
  const std::string open = "<" + std::string(tag);
  const std::string close = "</" + std::string(tag);
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t b = ifind(text, open, i);
    if (b == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, b - i));
    std::size_t c = ifind(text, close, b + open.size());
    if (c == std::string_view::npos) break;
    std::size_t gt = text.find('>', c);
    i = gt == std::string_view::npos ? text.size() : gt + 1;
  }
  return out;
}

std::string remove_tags(std::string_view text, std::string_view tag) {
  std::string out;
  std::size_t i = 0;
  const std::string open = "<" + std::string(tag);
  const std::string close = "</" + std::string(tag);
  while (i < text.size()) {
    std::size_t a = ifind(text, open, i);
    std::size_t b = ifind(text, close, i);
    std::size_t at = std::min(a, b);
    if (at == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, at - i));
    std::size_t gt = text.find('>', at);
    i = gt == std::string_view::npos ? text.size() : gt + 1;
  }
  return out;
}

std::string onlyinclude_sections(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (true) {
    std::size_t b = ifind(text, "<onlyinclude>", i);
    if (b == std::string_view::npos) break;
    b += 13;
    std::size_t e = ifind(text, "</onlyinclude>", b);
    if (e == std::string_view::npos) {
      out.append(text.substr(b));
      break;
    }
    out.append(text.substr(b, e - b));
    i = e + 14;
  }
  return out;
}

}  // namespace

std::string transcluded_body(std::string_view template_source) {
  std::string text = strip_comments(template_source);
  if (ifind(text, "<onlyinclude>") != std::string::npos) {
    text = onlyinclude_sections(text);
  }
  text = remove_blocks(text, "noinclude");
  return remove_tags(text, "includeonly");
}

TemplateStore::Builder& TemplateStore::Builder::add_revision(std::string_view name,
                                                             Timestamp ts,
                                                             std::string text) {
  std::string key = canonical_template_name(name);
  if (key.empty()) {
    throw std::invalid_argument("not a template name: " + std::string(name));
  }
  revisions_[key].emplace_back(ts, std::move(text));
  return *this;
}

TemplateStore::Builder& TemplateStore::Builder::add_alias(std::string_view alias,
                                                          std::string_view target) {
  std::string a = canonical_template_name(alias);
  std::string t = canonical_template_name(target);
  if (a.empty() || t.empty()) {
    throw std::invalid_argument("bad template alias: " + std::string(alias) + " -> " +
                                std::string(target));
  }
  if (a != t) aliases_[a] = t;
  return *this;
}

TemplateStore TemplateStore::Builder::build() && {
  TemplateStore store;
  for (auto& [name, revs] : revisions_) {
    std::stable_sort(revs.begin(), revs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& out = store.revisions_[name];
    out.reserve(revs.size());
    for (auto& [ts, text] : revs) {
      Revision r;
      r.timestamp = ts;
      r.text = transcluded_body(text);
      r.braces = parse_braces(r.text);
      out.push_back(std::move(r));
    }
  }
  for (const auto& [alias, target] : aliases_) {
    std::set<std::string> seen{alias};
    std::string cur = target;
    while (true) {
      auto it = aliases_.find(cur);
      if (it == aliases_.end()) break;
      if (!seen.insert(cur).second) {
        throw std::invalid_argument("template alias cycle through " + alias);
      }
      cur = it->second;
    }
    if (seen.count(cur)) throw std::invalid_argument("template alias cycle through " + alias);
    store.aliases_[alias] = cur;
  }
  return store;
}

std::string TemplateStore::resolve_name(std::string_view raw) const {
  std::string name = canonical_template_name(raw);
  auto it = aliases_.find(name);
  return it == aliases_.end() ? name : it->second;
}

bool TemplateStore::contains(std::string_view raw) const {
  return revisions_.count(resolve_name(raw)) > 0;
}

const TemplateStore::Revision* TemplateStore::revision_at(std::string_view raw,
                                                          Timestamp at) const {
  auto it = revisions_.find(resolve_name(raw));
  if (it == revisions_.end()) return nullptr;
  const auto& revs = it->second;
  auto pos = std::upper_bound(revs.begin(), revs.end(), at,
                              [](Timestamp t, const Revision& r) { return t < r.timestamp; });
  if (pos == revs.begin()) return nullptr;
  return &*std::prev(pos);
}

}  // namespace wikirel
