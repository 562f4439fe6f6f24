#include "wikirel/sql_dump.h"

#include <boost/iostreams/device/file.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>
#include <fstream>

namespace wikirel {

namespace {

bool is_space(int c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

SqlInsertReader::SqlInsertReader(std::istream& in, std::string table)
    : buf_(in.rdbuf()), table_(std::move(table)) {}

int SqlInsertReader::get() {
  int c = buf_->sbumpc();
  if (c != std::char_traits<char>::eof()) ++offset_;
  return c;
}

int SqlInsertReader::peek() { return buf_->sgetc(); }

void SqlInsertReader::skip_line() {
  for (int c = get(); c != EOF && c != '\n'; c = get()) {
  }
}

void SqlInsertReader::expect(char want) {
  int c = get();
  if (c == EOF) throw SqlParseError("truncated INSERT statement", offset_);
  if (c != want) {
    throw SqlParseError(std::string("expected '") + want + "'", offset_ - 1);
  }
}

// Consumes lines until one starting with "INSERT INTO"; positions the
// reader after "VALUES". Returns false at end of input.
bool SqlInsertReader::start_statement() {
  static const std::string kPrefix = "INSERT INTO ";
  while (peek() != EOF) {
    std::size_t matched = 0;
    while (matched < kPrefix.size() && peek() == kPrefix[matched]) {
      get();
      ++matched;
    }
    if (matched < kPrefix.size()) {
      if (peek() != '\n') skip_line();
      else get();
      continue;
    }
    std::string name;
    bool quoted = peek() == '`';
    if (quoted) get();
    for (int c = peek(); c != EOF && (quoted ? c != '`' : !is_space(c)); c = peek()) {
      name.push_back(static_cast<char>(get()));
    }
    if (quoted) expect('`');
    while (is_space(peek())) get();
    for (char c : std::string("VALUES")) expect(c);
    keep_ = table_.empty() || name == table_;
    in_statement_ = true;
    return true;
  }
  return false;
}

std::string SqlInsertReader::read_quoted() {
  std::string out;
  for (;;) {
    int c = get();
    if (c == EOF) throw SqlParseError("truncated INSERT statement", offset_);
    if (c == '\'') {
      if (peek() == '\'') {
        get();
        out.push_back('\'');
        continue;
      }
      return out;
    }
    if (c == '\\') {
      int e = get();
      if (e == EOF) throw SqlParseError("truncated INSERT statement", offset_);
      switch (e) {
        case '0': out.push_back('\0'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'Z': out.push_back('\x1a'); break;
        default: out.push_back(static_cast<char>(e));
      }
      continue;
    }
    out.push_back(static_cast<char>(c));
  }
}

void SqlInsertReader::read_tuple(SqlRow& row) {
  row.clear();
  expect('(');
  for (;;) {
    while (is_space(peek())) get();
    int c = peek();
    if (c == EOF) throw SqlParseError("truncated INSERT statement", offset_);
    if (c == '\'') {
      get();
      row.emplace_back(read_quoted());
    } else {
      std::string token;
      for (c = peek(); c != EOF && c != ',' && c != ')' && !is_space(c); c = peek()) {
        token.push_back(static_cast<char>(get()));
      }
      if (token.empty()) throw SqlParseError("empty value", offset_);
      if (token == "NULL") {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(std::move(token));
      }
    }
    while (is_space(peek())) get();
    c = get();
    if (c == ')') return;
    if (c == EOF) throw SqlParseError("truncated INSERT statement", offset_);
    if (c != ',') throw SqlParseError("expected ',' or ')'", offset_ - 1);
  }
}

bool SqlInsertReader::next(SqlRow& row) {
  for (;;) {
    if (!in_statement_ && !start_statement()) return false;
    while (is_space(peek())) get();
    read_tuple(row);
    while (is_space(peek())) get();
    int c = get();
    if (c == ';') {
      in_statement_ = false;
    } else if (c != ',') {
      if (c == EOF) throw SqlParseError("truncated INSERT statement", offset_);
      throw SqlParseError("expected ',' or ';' after tuple", offset_ - 1);
    }
    if (keep_) return true;
  }
}

struct InputFile::Impl {
  std::ifstream file;
  boost::iostreams::filtering_istream gz;
  bool compressed = false;
};

InputFile::InputFile(const std::string& path) : impl_(std::make_unique<Impl>()) {
  impl_->file.open(path, std::ios::binary);
  if (!impl_->file) throw std::runtime_error("cannot open " + path);
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    impl_->compressed = true;
    impl_->gz.push(boost::iostreams::gzip_decompressor());
    impl_->gz.push(impl_->file);
  }
}

InputFile::~InputFile() = default;

std::istream& InputFile::stream() {
  if (impl_->compressed) return impl_->gz;
  return impl_->file;
}

}  // namespace wikirel
