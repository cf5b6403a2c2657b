#!/usr/bin/env python3
"""Compile check for route fixture candidates: unknown identifiers and
unbalanced brackets produce javac-style diagnostics."""
import re
import sys

path = sys.argv[1]
with open(path, encoding="utf-8") as fh:
    src = fh.read()

clean = re.sub(r'"(?:[^"\\]|\\.)*"', '""', src)
clean = re.sub(r"//[^\n]*", "", clean)
clean = re.sub(r"/\*.*?\*/", lambda m: "\n" * m.group(0).count("\n"), clean, flags=re.S)

if clean.count("{") != clean.count("}") or clean.count("(") != clean.count(")"):
    print(f"{path}:1: error: reached end of file while parsing")
    print("1 error")
    sys.exit(1)

KEYWORDS = {
    "package", "import", "static", "public", "private", "protected", "final",
    "void", "boolean", "int", "long", "double", "char", "byte", "short",
    "class", "interface", "enum", "record", "extends", "implements", "new",
    "null", "true", "false", "return", "if", "else", "for", "while", "do",
    "break", "continue", "this", "super", "throw", "throws", "try", "catch",
    "finally", "var", "instanceof", "abstract", "switch", "case", "default",
}
API = {
    "demo", "org", "junit", "jupiter", "api", "Assertions", "Test",
    "RouteTest", "Route", "HttpMethod", "GET", "POST", "PUT", "DELETE",
    "matches", "pattern", "name", "isSafe", "equals",
    "assertTrue", "assertFalse", "assertEquals", "assertNotNull",
    "assertNull", "fail", "String", "Object",
}

declared = set(
    re.findall(
        r"\b(?:Route|HttpMethod|String|boolean|int|var|Object)\s+"
        r"([A-Za-z_$][A-Za-z0-9_$]*)\s*[=;,)]",
        clean,
    )
)
methods = set(re.findall(r"\bvoid\s+([A-Za-z_$][A-Za-z0-9_$]*)\s*\(", clean))
known = KEYWORDS | API | declared | methods

for ln, line in enumerate(clean.splitlines(), 1):
    for ident in re.findall(r"[A-Za-z_$][A-Za-z0-9_$]*", line):
        if ident not in known:
            kind = "method" if re.search(re.escape(ident) + r"\s*\(", line) else "variable"
            print(f"{path}:{ln}: error: cannot find symbol")
            print(f"  symbol:   {kind} {ident}")
            print("  location: class RouteTest")
            print("1 error")
            sys.exit(1)

sys.exit(0)
