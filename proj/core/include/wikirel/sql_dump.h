#ifndef WIKIREL_SQL_DUMP_H_
#define WIKIREL_SQL_DUMP_H_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wikirel {

class SqlParseError : public std::runtime_error {
 public:
  SqlParseError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// One tuple of an INSERT statement. NULL is nullopt; quoted strings are
// unescaped, numbers are kept as written.
using SqlRow = std::vector<std::optional<std::string>>;

// Streams the tuples of `INSERT INTO `table` VALUES (...),(...);` statements
// in a MediaWiki SQL dump. Memory use is bounded by the largest tuple; all
// other lines (DDL, comments, LOCK TABLES) are skipped.
class SqlInsertReader {
 public:
  // An empty `table` accepts tuples of every table.
  explicit SqlInsertReader(std::istream& in, std::string table = {});

  // Returns false at end of input. Throws SqlParseError when the input
  // ends inside a statement or a tuple is malformed.
  bool next(SqlRow& row);

  std::uint64_t offset() const { return offset_; }

 private:
  int get();
  int peek();
  void skip_line();
  bool start_statement();
  void expect(char c);
  void read_tuple(SqlRow& row);
  std::string read_quoted();

  std::streambuf* buf_;
  std::string table_;
  std::uint64_t offset_ = 0;
  bool in_statement_ = false;
  bool keep_ = false;
};

// Opens a dump file, decompressing transparently when the name ends in
// ".gz". Throws std::runtime_error when the file cannot be opened.
class InputFile {
 public:
  explicit InputFile(const std::string& path);
  ~InputFile();
  InputFile(const InputFile&) = delete;
  InputFile& operator=(const InputFile&) = delete;

  std::istream& stream();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wikirel

#endif  // WIKIREL_SQL_DUMP_H_
