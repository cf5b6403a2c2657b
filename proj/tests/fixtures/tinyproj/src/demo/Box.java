package demo;

public class Box {
  private int capacity;

  public Box(int capacity) {
    this.capacity = capacity;
  }

  public int capacity() {
    return capacity;
  }

  public boolean fits(int volume) {
    return volume <= capacity;
  }
}
