function showBanner() {
  const params = new URLSearchParams(window.location.search);
  document.write('<div class="banner">' + params.get('msg') + '</div>');
}
