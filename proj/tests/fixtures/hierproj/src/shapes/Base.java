package shapes;

public abstract class Base implements Shape {
  protected String name;

  public abstract double area();

  public String name() {
    return name;
  }
}
