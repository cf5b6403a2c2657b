package demo;

public class RadialGradientPaint extends GradientPaint {
  public RadialGradientPaint(String from, String to) {
    super(from, to);
  }

  @Override
  public String describe() {
    return "radial:" + from + ">" + to;
  }
}
