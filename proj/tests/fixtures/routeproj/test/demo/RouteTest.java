package demo;

import static org.junit.jupiter.api.Assertions.assertFalse;
import static org.junit.jupiter.api.Assertions.assertTrue;

import org.junit.jupiter.api.Test;

public class RouteTest {
  @Test
  public void matchesParamRoute() {
    Route route = new Route(HttpMethod.GET, "/users/{id}/posts");
    assertTrue(route.matches(HttpMethod.GET, "/users/7/posts"));
    assertFalse(route.matches(HttpMethod.POST, "/users/7/posts"));
  }
}
