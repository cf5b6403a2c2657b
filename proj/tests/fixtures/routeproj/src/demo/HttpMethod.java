package demo;

public final class HttpMethod {
  public static final HttpMethod GET = new HttpMethod("GET", true);
  public static final HttpMethod POST = new HttpMethod("POST", false);
  public static final HttpMethod PUT = new HttpMethod("PUT", false);
  public static final HttpMethod DELETE = new HttpMethod("DELETE", false);

  private final String name;
  private final boolean safe;

  private HttpMethod(String name, boolean safe) {
    this.name = name;
    this.safe = safe;
  }

  public String name() {
    return name;
  }

  public boolean isSafe() {
    return safe;
  }

  public boolean equals(Object other) {
    return this == other;
  }
}
