package demo;

public class Broken {
  public void oops() {
    if (true) {
