#include <expat.h>

#include <memory>

#include "wikirel/ingest.h"
#include "wikirel/strings.h"
#include "wikirel/wikimarkup.h"

namespace wikirel {

namespace {

enum class Field { kNone, kTitle, kNs, kPageId, kRevId, kTimestamp, kText };

class DumpHandler {
 public:
  explicit DumpHandler(HistoryDumpVisitor& v) : visitor_(v) {}

  static void XMLCALL start(void* self, const XML_Char* name, const XML_Char** attrs) {
    static_cast<DumpHandler*>(self)->on_start(name, attrs);
  }
  static void XMLCALL end(void* self, const XML_Char* name) {
    static_cast<DumpHandler*>(self)->on_end(name);
  }
  static void XMLCALL chars(void* self, const XML_Char* s, int len) {
    auto* h = static_cast<DumpHandler*>(self);
    if (h->field_ != Field::kNone) h->buf_.append(s, static_cast<std::size_t>(len));
  }

  std::string error;

 private:
  void on_start(std::string_view name, const XML_Char** attrs) {
    ++depth_;
    buf_.clear();
    field_ = Field::kNone;
    if (name == "page") {
      page_ = DumpPage{};
      page_depth_ = depth_;
      announced_ = false;
      wanted_ = false;
    } else if (page_depth_ == 0) {
      return;
    } else if (name == "revision") {
      announce();
      in_revision_ = true;
      rev_ = DumpRevision{};
    } else if (name == "redirect" && !in_revision_) {
      for (auto a = attrs; *a; a += 2) {
        if (std::string_view(a[0]) == "title") page_.redirect = a[1];
      }
    } else if (depth_ == page_depth_ + 1) {
      if (name == "title") field_ = Field::kTitle;
      else if (name == "ns") field_ = Field::kNs;
      else if (name == "id") field_ = Field::kPageId;
    } else if (in_revision_ && depth_ == page_depth_ + 2) {
      if (name == "id") field_ = Field::kRevId;
      else if (name == "timestamp") field_ = Field::kTimestamp;
      else if (name == "text" && wanted_) field_ = Field::kText;
    }
  }

  void on_end(std::string_view name) {
    switch (field_) {
      case Field::kTitle: page_.title = buf_; break;
      case Field::kNs: page_.ns = std::atoi(buf_.c_str()); break;
      case Field::kPageId: page_.id = std::atoll(buf_.c_str()); break;
      case Field::kRevId: rev_.id = std::atoll(buf_.c_str()); break;
      case Field::kTimestamp: {
        auto ts = parse_timestamp(buf_);
        if (!ts) error = "bad timestamp '" + buf_ + "' in page " + page_.title;
        else rev_.timestamp = *ts;
        break;
      }
      case Field::kText: rev_.text = std::move(buf_); break;
      case Field::kNone: break;
    }
    field_ = Field::kNone;
    buf_.clear();
    if (name == "revision" && in_revision_) {
      in_revision_ = false;
      if (wanted_) visitor_.on_revision(page_, std::move(rev_));
    } else if (name == "page" && page_depth_ == depth_) {
      announce();
      visitor_.on_page_end(page_);
      page_depth_ = 0;
    }
    --depth_;
  }

  void announce() {
    if (announced_) return;
    announced_ = true;
    wanted_ = visitor_.on_page(page_);
  }

  HistoryDumpVisitor& visitor_;
  DumpPage page_;
  DumpRevision rev_;
  std::string buf_;
  Field field_ = Field::kNone;
  int depth_ = 0;
  int page_depth_ = 0;
  bool in_revision_ = false;
  bool announced_ = false;
  bool wanted_ = false;
};

}  // namespace

void parse_history_dump(std::istream& in, HistoryDumpVisitor& visitor) {
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                      &XML_ParserFree);
  if (!parser) throw DumpParseError("cannot create XML parser");
  DumpHandler handler(visitor);
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(parser.get(), &DumpHandler::start, &DumpHandler::end);
  XML_SetCharacterDataHandler(parser.get(), &DumpHandler::chars);

  constexpr std::size_t kChunk = 1 << 16;
  for (;;) {
    void* buf = XML_GetBuffer(parser.get(), kChunk);
    if (buf == nullptr) throw DumpParseError("out of memory while parsing dump");
    in.read(static_cast<char*>(buf), kChunk);
    auto n = in.gcount();
    bool last = n == 0 || in.eof();
    if (XML_ParseBuffer(parser.get(), static_cast<int>(n), last) == XML_STATUS_ERROR) {
      throw DumpParseError(std::string("XML error: ") +
                           XML_ErrorString(XML_GetErrorCode(parser.get())) + " at line " +
                           std::to_string(XML_GetCurrentLineNumber(parser.get())));
    }
    if (!handler.error.empty()) throw DumpParseError(handler.error);
    if (last) break;
  }
}

WindowSelector::WindowSelector(DateRange window)
    : start_(start_of_day(window.from)), end_(end_of_day(window.to)) {}

void WindowSelector::offer(RevisionText rev) {
  if (rev.timestamp < start_) {
    if (!before_ || before_->timestamp <= rev.timestamp) before_ = std::move(rev);
  } else if (rev.timestamp <= end_) {
    inside_.push_back(std::move(rev));
  }
}

std::vector<RevisionText> WindowSelector::take() {
  std::vector<RevisionText> out;
  if (before_) out.push_back(std::move(*before_));
  for (auto& r : inside_) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  before_.reset();
  inside_.clear();
  return out;
}

std::vector<RevisionText> select_window(std::vector<RevisionText> revisions, DateRange window) {
  std::stable_sort(revisions.begin(), revisions.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  WindowSelector sel(window);
  for (auto& r : revisions) sel.offer(std::move(r));
  return sel.take();
}

const RevisionText* revision_of_day(const std::vector<RevisionText>& sorted, Date day) {
  auto limit = end_of_day(day);
  auto it = std::upper_bound(sorted.begin(), sorted.end(), limit,
                             [](Timestamp t, const RevisionText& r) { return t < r.timestamp; });
  if (it == sorted.begin()) return nullptr;
  return &*std::prev(it);
}

TemplateStore HistoryScan::template_store() const {
  TemplateStore::Builder b;
  for (const auto& [name, revs] : templates) {
    for (const auto& [ts, text] : revs) b.add_revision(name, ts, text);
  }
  for (const auto& [alias, target] : template_aliases) b.add_alias(alias, target);
  return std::move(b).build();
}

namespace {

std::string strip_namespace(std::string_view title) {
  auto colon = title.find(':');
  return colon == std::string_view::npos ? std::string(title) : std::string(title.substr(colon + 1));
}

class ScanVisitor : public HistoryDumpVisitor {
 public:
  ScanVisitor(const HistoryScanOptions& opts, HistoryScan& out)
      : opts_(opts), out_(out), selector_(opts.window) {}

  bool on_page(const DumpPage& page) override {
    key_.clear();
    latest_.reset();
    kind_ = Kind::kSkip;
    if (page.ns == kArticleNamespace) {
      auto title = normalize_title(page.title);
      if (page.redirect) {
        if (opts_.collect_redirects) out_.redirects[title] = normalize_title(*page.redirect);
        return false;
      }
      key_ = title;
      if (opts_.articles.count(title)) kind_ = Kind::kArticle;
      else if (opts_.infobox) kind_ = Kind::kInfoboxOnly;
    } else if (page.ns == kTemplateNamespace && opts_.collect_templates) {
      key_ = canonical_template_name(strip_namespace(page.title));
      if (key_.empty()) return false;
      kind_ = Kind::kTemplate;
      if (page.redirect) {
        auto target = canonical_template_name(strip_namespace(*page.redirect));
        if (!target.empty() && target != key_) out_.template_aliases[key_] = target;
      }
    }
    return kind_ != Kind::kSkip;
  }

  void on_revision(const DumpPage&, DumpRevision&& rev) override {
    if (kind_ == Kind::kInfoboxOnly) {
      latest_ = std::move(rev.text);
      return;
    }
    if (opts_.infobox && kind_ == Kind::kArticle) latest_ = rev.text;
    selector_.offer(RevisionText{key_, opts_.language, rev.timestamp, std::move(rev.text)});
  }

  void on_page_end(const DumpPage&) override {
    if (kind_ == Kind::kSkip) return;
    if (opts_.infobox && kind_ != Kind::kTemplate && latest_ &&
        matches_infobox(*latest_, *opts_.infobox)) {
      out_.infobox_matches.insert(key_);
    }
    if (kind_ == Kind::kArticle) {
      auto revs = selector_.take();
      if (revs.empty()) out_.diagnostics.add("article-no-revisions-in-window");
      auto& dst = out_.revisions[key_];
      for (auto& r : revs) dst.push_back(std::move(r));
    } else if (kind_ == Kind::kTemplate) {
      auto& dst = out_.templates[key_];
      for (auto& r : selector_.take()) dst.emplace_back(r.timestamp, std::move(r.wikitext));
    } else {
      selector_.take();
    }
  }

 private:
  enum class Kind { kSkip, kArticle, kTemplate, kInfoboxOnly };
  const HistoryScanOptions& opts_;
  HistoryScan& out_;
  WindowSelector selector_;
  std::string key_;
  Kind kind_ = Kind::kSkip;
  std::optional<std::string> latest_;
};

}  // namespace

HistoryScan scan_history_dump(std::istream& in, const HistoryScanOptions& options) {
  HistoryScan scan;
  ScanVisitor visitor(options, scan);
  parse_history_dump(in, visitor);
  for (const auto& title : options.articles) {
    if (!scan.revisions.count(title)) scan.diagnostics.add("article-missing");
  }
  return scan;
}

}  // namespace wikirel
