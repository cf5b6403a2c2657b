package demo;

public class LinearGradientPaint extends GradientPaint {
  public LinearGradientPaint(String from, String to) {
    super(from, to);
  }

  @Override
  public String describe() {
    return "linear:" + from + ">" + to;
  }
}
